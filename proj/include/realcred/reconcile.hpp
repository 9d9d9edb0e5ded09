#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "realcred/doc_model.hpp"

namespace realcred {

/// Matching tolerances; predicates are nested Exact ⊂ Tolerant ⊂ SuperTolerant.
enum class MatchMode { Exact = 0, Tolerant = 1, SuperTolerant = 2 };

inline constexpr MatchMode kAllModes[] = {MatchMode::Exact, MatchMode::Tolerant, MatchMode::SuperTolerant};

std::string_view to_string(MatchMode mode) noexcept;
/// "exact", "tolerant", "super"/"super-tolerant" (case-insensitive).
std::optional<MatchMode> parse_mode(std::string_view s) noexcept;

enum class MatchReason { ExactEqual, NormalizedEqual, EditWithinThreshold, DomainEqual, NoMatch };
std::string_view to_string(MatchReason reason) noexcept;

struct MatchVerdict {
  bool matched = false;
  MatchMode mode_used = MatchMode::Exact;
  double score = 0.0;
  MatchReason reason = MatchReason::NoMatch;
};

std::string normalize(std::string_view s, MatchMode mode);

/// Unit-cost edit distance over Unicode scalar values.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

double ngram_jaccard(std::string_view a, std::string_view b, int n);
/// Jaccard over whitespace-token sets after Tolerant normalization.
double token_jaccard(std::string_view a, std::string_view b);

/// Classic 4-character Soundex of the first token that contains a letter.
/// Throws Error(NotEncodable) when there is none.
std::string phonetic_encode(std::string_view s);

enum class NifStatus { Valid, Invalid, Malformed };
std::string_view to_string(NifStatus s) noexcept;
NifStatus validate_nif(std::string_view s);
/// Check digit for an 8-digit NIF prefix.
int nif_check_digit(std::string_view first_eight);

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;

/// Throws Error(OutOfRange) for coordinates outside [-90,90]x[-180,180].
double haversine_km(GeoPoint a, GeoPoint b);

/// Edit budget for Tolerant matching: max(1, ceil(0.1 * max_len)).
std::size_t tolerant_edit_budget(std::size_t max_len);

MatchVerdict field_match(std::string_view a, std::string_view b, MatchMode mode, ValueKind kind);

// Cross-document reconciliation.

enum class Rule { NifMismatch, NifInvalid, NameMismatch, CoordinateMismatch, MissingReference };
enum class Severity { Error, Warning };
std::string_view to_string(Rule r) noexcept;
std::string_view to_string(Severity s) noexcept;

struct Discrepancy {
  Rule rule;
  Severity severity;
  std::string detail;
  std::vector<std::pair<std::string, std::string>> involved;  // (doc_id, label)
  friend bool operator==(const Discrepancy&, const Discrepancy&) = default;
};

struct ReconciliationReport {
  std::string process_id;
  std::vector<Discrepancy> discrepancies;
  bool consistent = true;
  friend bool operator==(const ReconciliationReport&, const ReconciliationReport&) = default;
};

struct ReconcileOptions {
  double coordinate_tolerance_km = 1.0;
  std::string process_id;
};

/// Applies the NIF validity, NIF consistency, name, coordinate and
/// missing-reference rules, in that order. Throws Error(EmptyInput) on no
/// documents and Error(DuplicateKind) on two documents of one kind.
ReconciliationReport reconcile_documents(std::span<const ExtractionResult> docs, const ReconcileOptions& options = {});

nlohmann::json to_json(const ReconciliationReport& report);
ReconciliationReport report_from_json(const nlohmann::json& j);

}  // namespace realcred
