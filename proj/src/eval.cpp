#include "realcred/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>

#include "realcred/error.hpp"
#include "realcred/extraction.hpp"

namespace realcred {

using nlohmann::json;

std::vector<EntitySpan> spans_from_stream(const LabeledTokenStream& stream) {
  std::vector<EntitySpan> out;
  const auto& t = stream.tokens;
  for (std::size_t i = 0; i < t.size();) {
    std::size_t j = i + 1;
    while (j < t.size() && t[j].label == t[i].label) ++j;
    if (t[i].label != kOutsideLabel) out.push_back({t[i].label, i, j});
    i = j;
  }
  return out;
}

Metrics Metrics::from(const Counts& c) {
  Metrics m;
  m.counts = c;
  if (c.tp + c.fp + c.fn == 0) {
    m.precision = m.recall = m.f1 = m.accuracy = 1.0;
    return m;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.accuracy = ratio(c.tp, c.tp + c.fp + c.fn);
  return m;
}

namespace {

FieldLevelMetrics finish(const std::map<std::string, Counts>& per_label) {
  FieldLevelMetrics out;
  Counts total;
  for (const auto& [label, c] : per_label) {
    out.per_label[label] = Metrics::from(c);
    total += c;
  }
  out.aggregate = Metrics::from(total);
  return out;
}

// Kuhn's augmenting-path maximum matching; left vertices tried in order.
std::size_t max_matching(const std::vector<std::vector<bool>>& adj, std::size_t right_size) {
  std::vector<std::ptrdiff_t> owner(right_size, -1);
  std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t u, std::vector<bool>& seen) {
    for (std::size_t v = 0; v < right_size; ++v) {
      if (!adj[u][v] || seen[v]) continue;
      seen[v] = true;
      if (owner[v] < 0 || augment(static_cast<std::size_t>(owner[v]), seen)) {
        owner[v] = static_cast<std::ptrdiff_t>(u);
        return true;
      }
    }
    return false;
  };
  std::size_t matched = 0;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    std::vector<bool> seen(right_size, false);
    if (augment(u, seen)) ++matched;
  }
  return matched;
}

}  // namespace

FieldLevelMetrics entity_prf(std::span<const EntitySpan> predicted, std::span<const EntitySpan> gold) {
  std::map<EntitySpan, std::size_t> gold_left;
  std::map<std::string, Counts> per_label;
  auto check = [](const EntitySpan& s) {
    if (s.start_token >= s.end_token || s.label == kOutsideLabel || s.label.empty()) {
      throw Error(Errc::InvalidArgument, "ill-formed span " + s.label);
    }
  };
  for (const auto& g : gold) {
    check(g);
    ++gold_left[g];
    per_label[g.label];
  }
  for (const auto& p : predicted) {
    check(p);
    auto& c = per_label[p.label];
    auto it = gold_left.find(p);
    if (it != gold_left.end() && it->second > 0) {
      --it->second;
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  for (const auto& [span, left] : gold_left) per_label[span.label].fn += left;
  return finish(per_label);
}

FieldLevelMetrics field_level_compare(const ExtractionResult& extracted, const GroundTruthDocument& gold, MatchMode mode) {
  if (extracted.kind != gold.kind) {
    throw Error(Errc::KindMismatch, std::string(to_string(extracted.kind)) + " vs " + std::string(to_string(gold.kind)));
  }
  std::map<std::string, Counts> per_label;
  for (const auto& schema : schema_for(gold.kind)) {
    std::vector<std::string> ev;
    if (auto it = extracted.fields.find(schema.label); it != extracted.fields.end()) {
      for (const auto& v : it->second) ev.push_back(v.value);
    }
    const auto gv = gold.values_of(schema.label);
    std::vector<std::vector<bool>> adj(ev.size(), std::vector<bool>(gv.size()));
    for (std::size_t i = 0; i < ev.size(); ++i) {
      for (std::size_t j = 0; j < gv.size(); ++j) adj[i][j] = field_match(ev[i], gv[j], mode, schema.value_kind).matched;
    }
    const std::size_t tp = max_matching(adj, gv.size());
    per_label[schema.label] = {tp, ev.size() - tp, gv.size() - tp};
  }
  for (const auto& [label, values] : extracted.fields) {
    if (!find_field(gold.kind, label)) per_label[label].fp += values.size();
  }
  return finish(per_label);
}

FieldLevelMetrics merge_metrics(std::span<const FieldLevelMetrics> parts) {
  std::map<std::string, Counts> per_label;
  for (const auto& p : parts) {
    for (const auto& [label, m] : p.per_label) per_label[label] += m.counts;
  }
  return finish(per_label);
}

std::uint64_t benchmark_doc_seed(std::uint64_t seed, std::size_t i) { return seed + i; }

const BenchmarkCell* BenchmarkReport::cell(DocumentKind kind, MatchMode mode) const {
  for (const auto& c : cells) {
    if (c.kind == kind && c.mode == mode) return &c;
  }
  return nullptr;
}

const LatencySummary* BenchmarkReport::latency_for(DocumentKind kind) const {
  for (const auto& l : latency) {
    if (l.kind == kind) return &l;
  }
  return nullptr;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  if (config.count < 1) throw Error(Errc::InvalidArgument, "count must be >= 1");
  if (config.kinds.empty() || config.modes.empty()) throw Error(Errc::InvalidArgument, "no kinds or modes requested");
  config.profile.validate();

  BenchmarkReport report;
  report.config = config;
  for (std::size_t i = 0; i < config.count; ++i) report.doc_seeds.push_back(benchmark_doc_seed(config.seed, i));

  for (auto kind : config.kinds) {
    std::vector<std::vector<FieldLevelMetrics>> per_mode(config.modes.size());
    LatencySummary lat{kind};
    for (std::size_t i = 0; i < config.count; ++i) {
      const auto start = std::chrono::steady_clock::now();
      const auto gold = generate_ground_truth(kind, report.doc_seeds[i]);
      const auto tokens = apply_noise(gold, config.profile, config.seed);
      const auto stream = align_labels(gold, tokens);
      const auto extracted = extract_fields(stream).result;  // sorts into reading order first
      for (std::size_t m = 0; m < config.modes.size(); ++m) {
        per_mode[m].push_back(field_level_compare(extracted, gold, config.modes[m]));
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      lat.total_s += secs;
      lat.max_s = std::max(lat.max_s, secs);
      ++lat.documents;
    }
    lat.mean_s = lat.total_s / static_cast<double>(lat.documents);
    report.latency.push_back(lat);
    for (std::size_t m = 0; m < config.modes.size(); ++m) {
      report.cells.push_back({kind, config.modes[m], merge_metrics(per_mode[m])});
    }
  }
  return report;
}

BenchmarkReport run_benchmark(DocumentKind kind, std::size_t count, const NoiseProfile& profile, std::uint64_t seed,
                              std::vector<MatchMode> modes) {
  BenchmarkConfig c;
  c.kinds = {kind};
  c.count = count;
  c.profile = profile;
  c.seed = seed;
  c.modes = std::move(modes);
  return run_benchmark(c);
}

json to_json(const Metrics& m) {
  return {{"tp", m.counts.tp},         {"fp", m.counts.fp}, {"fn", m.counts.fn},
          {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"accuracy", m.accuracy}};
}

json to_json(const FieldLevelMetrics& m) {
  json labels = json::object();
  for (const auto& [label, v] : m.per_label) labels[label] = to_json(v);
  return {{"aggregate", to_json(m.aggregate)}, {"per_label", std::move(labels)}};
}

json to_json(const BenchmarkReport& r) {
  json kinds = json::array(), modes = json::array();
  for (auto k : r.config.kinds) kinds.push_back(to_string(k));
  for (auto m : r.config.modes) modes.push_back(to_string(m));
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"kind", to_string(c.kind)}, {"mode", to_string(c.mode)}, {"metrics", to_json(c.metrics)}});
  }
  json latency = json::array();
  for (const auto& l : r.latency) {
    latency.push_back({{"kind", to_string(l.kind)},
                       {"documents", l.documents},
                       {"mean_s", l.mean_s},
                       {"max_s", l.max_s},
                       {"total_s", l.total_s}});
  }
  return {{"config",
           {{"kinds", kinds},
            {"count", r.config.count},
            {"seed", r.config.seed},
            {"modes", modes},
            {"profile", to_json(r.config.profile)}}},
          {"doc_seeds", r.doc_seeds},
          {"results", std::move(cells)},
          {"latency", std::move(latency)}};
}

namespace {

DocumentKind kind_from(const json& j) {
  auto k = parse_kind(j.get<std::string>());
  if (!k) throw Error(Errc::ParseError, "unknown document kind " + j.get<std::string>());
  return *k;
}

MatchMode mode_from(const json& j) {
  auto m = parse_mode(j.get<std::string>());
  if (!m) throw Error(Errc::ParseError, "unknown match mode " + j.get<std::string>());
  return *m;
}

Metrics metrics_from(const json& j) {
  Metrics m;
  m.counts = {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("fn").get<std::size_t>()};
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.accuracy = j.at("accuracy").get<double>();
  return m;
}

}  // namespace

BenchmarkReport benchmark_from_json(const json& j) {
  try {
    BenchmarkReport r;
    const auto& c = j.at("config");
    for (const auto& k : c.at("kinds")) r.config.kinds.push_back(kind_from(k));
    r.config.modes.clear();
    for (const auto& m : c.at("modes")) r.config.modes.push_back(mode_from(m));
    r.config.count = c.at("count").get<std::size_t>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.config.profile = profile_from_json(c.at("profile"));
    r.doc_seeds = j.at("doc_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& cell : j.at("results")) {
      FieldLevelMetrics fm;
      fm.aggregate = metrics_from(cell.at("metrics").at("aggregate"));
      for (const auto& [label, v] : cell.at("metrics").at("per_label").items()) fm.per_label[label] = metrics_from(v);
      r.cells.push_back({kind_from(cell.at("kind")), mode_from(cell.at("mode")), std::move(fm)});
    }
    for (const auto& l : j.at("latency")) {
      r.latency.push_back({kind_from(l.at("kind")), l.at("documents").get<std::size_t>(), l.at("mean_s").get<double>(),
                           l.at("max_s").get<double>(), l.at("total_s").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("benchmark report: ") + e.what());
  }
}

std::vector<HumanBaseline> human_baseline_from_json(const json& j) {
  try {
    std::vector<HumanBaseline> out;
    for (const auto& b : j.at("baselines")) {
      HumanBaseline h{kind_from(b.at("kind")), b.at("human_seconds").get<double>(), std::nullopt};
      if (auto it = b.find("human_f1"); it != b.end() && !it->is_null()) h.human_f1 = it->get<double>();
      if (!(h.human_seconds > 0)) throw Error(Errc::ParseError, "human_seconds must be positive");
      out.push_back(h);
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("human baseline: ") + e.what());
  }
}

std::vector<ComparisonRow> compare_human(const BenchmarkReport& report, std::span<const HumanBaseline> baseline) {
  std::vector<ComparisonRow> rows;
  for (const auto& cell : report.cells) {
    auto h = std::find_if(baseline.begin(), baseline.end(), [&](const HumanBaseline& b) { return b.kind == cell.kind; });
    if (h == baseline.end()) throw Error(Errc::MissingKind, std::string(to_string(cell.kind)));
    const auto* lat = report.latency_for(cell.kind);
    if (!lat) throw Error(Errc::MissingKind, "no latency for " + std::string(to_string(cell.kind)));
    ComparisonRow row{cell.kind, cell.mode, cell.metrics.aggregate.f1, h->human_f1, lat->mean_s, h->human_seconds, 0.0,
                      std::nullopt};
    row.reduction_pct = 100.0 * (1.0 - row.pipeline_s / row.human_s);
    if (h->human_f1) row.delta_f1 = row.f1 - *h->human_f1;
    rows.push_back(row);
  }
  return rows;
}

std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::string out = "kind,mode,f1,human_f1,pipeline_s,human_s,reduction_pct\n";
  char buf[256];
  for (const auto& r : rows) {
    char hf[32] = "";
    if (r.human_f1) std::snprintf(hf, sizeof hf, "%.4f", *r.human_f1);
    std::snprintf(buf, sizeof buf, "%s,%s,%.4f,%s,%.6f,%.3f,%.2f\n", std::string(to_string(r.kind)).c_str(),
                  std::string(to_string(r.mode)).c_str(), r.f1, hf, r.pipeline_s, r.human_s, r.reduction_pct);
    out += buf;
  }
  return out;
}

}  // namespace realcred
