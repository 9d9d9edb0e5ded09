#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace realcred {

enum class DocumentKind { CitizenCard, EnergyCertificate, PropertyRecord };

inline constexpr DocumentKind kAllKinds[] = {DocumentKind::CitizenCard, DocumentKind::EnergyCertificate,
                                             DocumentKind::PropertyRecord};

/// "CitizenCard", "EnergyCertificate", "PropertyRecord" (annotation files, JSON).
std::string_view to_string(DocumentKind kind) noexcept;
/// Accepts both the CamelCase and the kebab-case ("citizen-card") spellings.
std::optional<DocumentKind> parse_kind(std::string_view s) noexcept;
std::string_view to_cli_name(DocumentKind kind) noexcept;

enum class ValueKind { PersonName, NifNumber, Date, Sex, Address, RegistryNumber, EnergyClass, GeoCoordinate, FreeText };

struct FieldSchema {
  std::string label;
  ValueKind value_kind;
  bool required;
  bool repeatable;
};

// Virtual page the templates are laid out on.
inline constexpr int kPageWidth = 1000;
inline constexpr int kPageHeight = 700;

struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool valid() const noexcept { return x0 >= 0 && y0 >= 0 && x0 < x1 && y0 < y1; }
  long long area() const noexcept { return static_cast<long long>(x1 - x0) * (y1 - y0); }
  double center_y() const noexcept { return (y0 + y1) / 2.0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Annotation {
  std::string label;  // schema label or "O"
  std::string text;
  BoundingBox box;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline constexpr std::string_view kOutsideLabel = "O";

struct GroundTruthField {
  std::string label;
  std::string value;
  BoundingBox box;
  friend bool operator==(const GroundTruthField&, const GroundTruthField&) = default;
};

struct GroundTruthDocument {
  DocumentKind kind = DocumentKind::CitizenCard;
  std::string doc_id;
  std::vector<GroundTruthField> fields;
  std::uint64_t seed = 0;

  /// Gold values for one label, in document order.
  std::vector<std::string> values_of(std::string_view label) const;
  friend bool operator==(const GroundTruthDocument&, const GroundTruthDocument&) = default;
};

struct ExtractedValue {
  std::string value;
  double confidence = 1.0;
  friend bool operator==(const ExtractedValue&, const ExtractedValue&) = default;
};

struct ExtractionResult {
  DocumentKind kind = DocumentKind::CitizenCard;
  std::string doc_id;
  std::map<std::string, std::vector<ExtractedValue>> fields;

  /// First value of a label, if any.
  std::optional<std::string> first(std::string_view label) const;
  std::vector<std::string> values_of(std::string_view label) const;
  friend bool operator==(const ExtractionResult&, const ExtractionResult&) = default;
};

struct Token {
  std::string text;
  BoundingBox box;
  double confidence = 1.0;
  friend bool operator==(const Token&, const Token&) = default;
};

/// Fixed per-kind field schema, in template order.
const std::vector<FieldSchema>& schema_for(DocumentKind kind);
const FieldSchema* find_field(DocumentKind kind, std::string_view label);
/// Position of a label within its kind's schema.
std::optional<std::size_t> schema_index(DocumentKind kind, std::string_view label);

struct Violation {
  enum class Code { MissingRequired, NotRepeatable, UnknownLabel, InvalidBox, OverlappingBoxes, EmptyValue, BadConfidence };
  Code code;
  std::string label;
  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string_view to_string(Violation::Code code) noexcept;

std::vector<Violation> validate_document(const GroundTruthDocument& doc);
std::vector<Violation> validate_document(const ExtractionResult& result);

/// Groups tokens into rows (vertical centers within `row_tolerance`, closed
/// transitively), orders rows top-down by mean center and each row by x0.
/// Ties keep input order.
std::vector<Token> reading_order_sort(std::span<const Token> tokens, int row_tolerance);

double compute_iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Annotation file format.

struct AnnotatedEntity {
  std::string label;
  std::string text;
  BoundingBox box;
  /// Only present on OCR token streams; gold files omit it.
  std::optional<double> confidence;
  friend bool operator==(const AnnotatedEntity&, const AnnotatedEntity&) = default;
};

struct AnnotationFile {
  DocumentKind kind = DocumentKind::CitizenCard;
  std::string doc_id;
  std::vector<AnnotatedEntity> entities;
  friend bool operator==(const AnnotationFile&, const AnnotationFile&) = default;
};

nlohmann::json to_json(const AnnotationFile& file);
/// Throws Error(ParseError) on shape violations.
AnnotationFile annotation_from_json(const nlohmann::json& j);

AnnotationFile to_annotation(const GroundTruthDocument& doc);
/// Inverse of `to_annotation`; seed is not carried by the file format.
GroundTruthDocument gold_from_annotation(const AnnotationFile& file, std::uint64_t seed);

nlohmann::json to_json(const ExtractionResult& result);
ExtractionResult extraction_from_json(const nlohmann::json& j);

}  // namespace realcred
