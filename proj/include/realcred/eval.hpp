#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "realcred/doc_model.hpp"
#include "realcred/reconcile.hpp"
#include "realcred/synthgen.hpp"

namespace realcred {

struct EntitySpan {
  std::string label;
  std::size_t start_token = 0;
  std::size_t end_token = 0;  // exclusive
  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

/// Maximal runs of one non-"O" label, in stream order.
std::vector<EntitySpan> spans_from_stream(const LabeledTokenStream& stream);

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct Metrics {
  Counts counts;
  double precision = 0, recall = 0, f1 = 0, accuracy = 0;

  /// P = tp/(tp+fp) and R = tp/(tp+fn), each 0 when its denominator is 0;
  /// f1 = 2PR/(P+R) or 0; accuracy = tp/(tp+fp+fn). All four are 1 when
  /// there is nothing to find and nothing was predicted.
  static Metrics from(const Counts& c);
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct FieldLevelMetrics {
  std::map<std::string, Metrics> per_label;
  /// Micro average: counts are the sums of per-label counts.
  Metrics aggregate;
  friend bool operator==(const FieldLevelMetrics&, const FieldLevelMetrics&) = default;
};

/// Strict one-to-one span matching on (label, start, end). Throws
/// Error(InvalidArgument) on a span with start >= end or label "O".
FieldLevelMetrics entity_prf(std::span<const EntitySpan> predicted, std::span<const EntitySpan> gold);

/// Per schema label, extracted values are matched one-to-one against gold
/// values with `field_match`. The matching is a maximum bipartite matching
/// found by augmenting paths, trying values in document order. Throws
/// Error(KindMismatch).
FieldLevelMetrics field_level_compare(const ExtractionResult& extracted, const GroundTruthDocument& gold, MatchMode mode);

/// Sums counts per label and recomputes the derived ratios.
FieldLevelMetrics merge_metrics(std::span<const FieldLevelMetrics> parts);

struct BenchmarkConfig {
  std::vector<DocumentKind> kinds;
  std::size_t count = 50;
  NoiseProfile profile = NoiseProfile::paper_like();
  std::uint64_t seed = 0;
  std::vector<MatchMode> modes = {MatchMode::Exact, MatchMode::Tolerant, MatchMode::SuperTolerant};
};

/// Document i of a run uses generator seed `seed + i` and noise seed `seed`.
std::uint64_t benchmark_doc_seed(std::uint64_t seed, std::size_t i);

struct BenchmarkCell {
  DocumentKind kind;
  MatchMode mode;
  FieldLevelMetrics metrics;
};

struct LatencySummary {
  DocumentKind kind;
  std::size_t documents = 0;
  double mean_s = 0, max_s = 0, total_s = 0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<BenchmarkCell> cells;
  std::vector<LatencySummary> latency;
  std::vector<std::uint64_t> doc_seeds;

  const BenchmarkCell* cell(DocumentKind kind, MatchMode mode) const;
  const LatencySummary* latency_for(DocumentKind kind) const;
};

/// Per document: generate, noise, align, reading-order sort, extract and
/// compare in every mode; the whole chain is timed.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);
BenchmarkReport run_benchmark(DocumentKind kind, std::size_t count, const NoiseProfile& profile, std::uint64_t seed,
                              std::vector<MatchMode> modes);

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const FieldLevelMetrics& m);
nlohmann::json to_json(const BenchmarkReport& r);
BenchmarkReport benchmark_from_json(const nlohmann::json& j);

struct HumanBaseline {
  DocumentKind kind;
  double human_seconds = 0;
  std::optional<double> human_f1;
};

std::vector<HumanBaseline> human_baseline_from_json(const nlohmann::json& j);

struct ComparisonRow {
  DocumentKind kind;
  MatchMode mode;
  double f1 = 0;
  std::optional<double> human_f1;
  double pipeline_s = 0;
  double human_s = 0;
  /// 100 * (1 - pipeline_s / human_s); negative when slower, never clamped.
  double reduction_pct = 0;
  std::optional<double> delta_f1;
};

/// One row per report cell. Throws Error(MissingKind) when the baseline lacks
/// a kind of the report.
std::vector<ComparisonRow> compare_human(const BenchmarkReport& report, std::span<const HumanBaseline> baseline);

/// Columns: kind,mode,f1,human_f1,pipeline_s,human_s,reduction_pct.
std::string comparison_csv(std::span<const ComparisonRow> rows);

}  // namespace realcred
