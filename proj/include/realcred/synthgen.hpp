#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "realcred/doc_model.hpp"

namespace realcred {

/// Parametric OCR error channel operating on text and geometry.
struct NoiseProfile {
  double char_sub_rate = 0.0;
  /// Keys are one character or a digraph ("rn"); values are replacements.
  std::map<std::string, std::vector<std::string>> confusion_table;
  double token_drop_rate = 0.0;
  double token_split_rate = 0.0;
  double case_flip_rate = 0.0;
  double diacritic_strip_rate = 0.0;
  int box_jitter_px = 0;
  double confidence_floor = 1.0;

  /// Lossless channel: no edits, no jitter, confidence 1.
  static NoiseProfile identity();
  /// Calibrated default. Box jitter is the term that penalizes the denser
  /// templates; the text rates set the overall error level.
  static NoiseProfile paper_like();
  static std::map<std::string, std::vector<std::string>> default_confusions();

  /// Throws Error(InvalidArgument) on out-of-range parameters.
  void validate() const;

  friend bool operator==(const NoiseProfile&, const NoiseProfile&) = default;
};

nlohmann::json to_json(const NoiseProfile& p);
NoiseProfile profile_from_json(const nlohmann::json& j);

struct LabeledToken {
  Token token;
  std::string label;
  friend bool operator==(const LabeledToken&, const LabeledToken&) = default;
};

struct LabeledTokenStream {
  std::string doc_id;
  DocumentKind kind = DocumentKind::CitizenCard;
  std::vector<LabeledToken> tokens;
  friend bool operator==(const LabeledTokenStream&, const LabeledTokenStream&) = default;
};

AnnotationFile to_annotation(const LabeledTokenStream& stream);
LabeledTokenStream stream_from_annotation(const AnnotationFile& file);

/// One fictitious person and property, rendered consistently into all three
/// document kinds.
struct DocumentCase {
  GroundTruthDocument citizen_card;
  GroundTruthDocument energy_certificate;
  GroundTruthDocument property_record;

  const GroundTruthDocument& get(DocumentKind kind) const;
};

DocumentCase generate_case(std::uint64_t seed);
GroundTruthDocument generate_ground_truth(DocumentKind kind, std::uint64_t seed);

std::vector<Token> apply_noise(const GroundTruthDocument& doc, const NoiseProfile& profile, std::uint64_t seed);

inline constexpr double kDefaultIouThreshold = 0.5;

/// Labels each token with the gold field of maximal IoU (ties: lower schema
/// index, then document order), or "O" below the threshold.
LabeledTokenStream align_labels(const GroundTruthDocument& gold, std::span<const Token> tokens,
                                double iou_threshold = kDefaultIouThreshold);

struct DatasetEntry {
  GroundTruthDocument gold;
  LabeledTokenStream stream;
  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct ManifestEntry {
  std::string doc_id;
  DocumentKind kind;
  std::uint64_t seed;
  std::string annotation_file;
  std::string tokens_file;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> documents;
  NoiseProfile profile;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<DatasetEntry> entries;
};

/// Writes `<doc_id>.json` (gold annotation), `<doc_id>.tokens.json` (labeled
/// noisy tokens) and `manifest.json`. Throws Error(DuplicateDocId) before
/// touching the directory, Error(IoFailure) with the path on write errors.
DatasetManifest write_dataset(std::span<const DatasetEntry> entries, const NoiseProfile& profile,
                              const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace realcred
