// Benchmark runner: `eval run` produces a report, `eval compare` sets it
// against the manual-processing baseline.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "realcred/eval.hpp"
#include "tool_support.hpp"

namespace {

using namespace realcred;

void print_summary(const BenchmarkReport& r) {
  for (const auto& c : r.cells) {
    const auto& m = c.metrics.aggregate;
    std::fprintf(stderr, "%-18s %-14s P=%.4f R=%.4f F1=%.4f\n", std::string(to_string(c.kind)).c_str(),
                 std::string(to_string(c.mode)).c_str(), m.precision, m.recall, m.f1);
  }
  for (const auto& l : r.latency) {
    std::fprintf(stderr, "%-18s latency mean=%.6fs max=%.6fs\n", std::string(to_string(l.kind)).c_str(), l.mean_s,
                 l.max_s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extraction benchmark"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the benchmark and write a JSON report");
  std::string kind_arg = "all", profile_arg = "default", modes_arg = "exact,tolerant,super", out;
  std::size_t count = 50;
  std::uint64_t seed = 0;
  run->add_option("--kind", kind_arg, "document kind, comma list or all");
  run->add_option("--count", count, "documents per kind")->check(CLI::PositiveNumber);
  run->add_option("--profile", profile_arg, "noise profile JSON path, 'default' or 'identity'");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--modes", modes_arg, "comma list of exact, tolerant, super");
  run->add_option("--out", out, "report path; stdout when omitted");

  auto* compare = app.add_subcommand("compare", "compare a report with the human baseline, as CSV");
  std::string report_path, human_path, csv_out;
  compare->add_option("--report", report_path, "report JSON from `eval run`")->required();
  compare->add_option("--human", human_path, "human baseline JSON")->required();
  compare->add_option("--out", csv_out, "CSV path; stdout when omitted");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      BenchmarkConfig cfg;
      cfg.kinds = tools::parse_kinds(kind_arg);
      cfg.count = count;
      cfg.profile = tools::load_profile(profile_arg);
      cfg.seed = seed;
      cfg.modes = tools::parse_modes(modes_arg);
      const auto report = run_benchmark(cfg);
      print_summary(report);
      const auto text = to_json(report).dump(2) + "\n";
      if (out.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        tools::write_text_file(out, text);
      }
    } else {
      const auto report = benchmark_from_json(tools::read_json_file(report_path));
      const auto baseline = human_baseline_from_json(tools::read_json_file(human_path));
      const auto csv = comparison_csv(compare_human(report, baseline));
      if (csv_out.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        tools::write_text_file(csv_out, csv);
      }
    }
  } catch (const Error& e) {
    return tools::report_error("eval", e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eval: %s\n", e.what());
    return 1;
  }
  return 0;
}
