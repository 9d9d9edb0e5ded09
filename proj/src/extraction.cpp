#include "realcred/extraction.hpp"

namespace realcred {

ExtractionOutcome extract_fields(const LabeledTokenStream& stream, int row_tolerance) {
  std::vector<Token> tokens;
  tokens.reserve(stream.tokens.size());
  for (const auto& t : stream.tokens) tokens.push_back(t.token);
  const auto order = reading_order_permutation(tokens, row_tolerance);

  struct Run {
    std::string label;
    std::string text;
    double confidence_sum = 0.0;
    std::size_t count = 0;
  };
  std::vector<Run> runs;
  std::string previous;
  for (auto idx : order) {
    const auto& lt = stream.tokens[idx];
    if (lt.label == kOutsideLabel || !find_field(stream.kind, lt.label)) {
      previous.clear();
      continue;
    }
    if (lt.label != previous) runs.push_back({lt.label, {}, 0.0, 0});
    auto& run = runs.back();
    if (!run.text.empty()) run.text.push_back(' ');
    run.text += lt.token.text;
    run.confidence_sum += lt.token.confidence;
    ++run.count;
    previous = lt.label;
  }

  ExtractionOutcome out;
  out.result.kind = stream.kind;
  out.result.doc_id = stream.doc_id;
  out.unlabeled = runs.empty();
  // Non-repeatable labels split across runs are merged; the merged
  // confidence is the token-weighted mean.
  std::map<std::string, std::pair<double, std::size_t>> merged_conf;
  for (const auto& run : runs) {
    auto& values = out.result.fields[run.label];
    const bool repeatable = find_field(stream.kind, run.label)->repeatable;
    if (repeatable || values.empty()) {
      values.push_back({run.text, run.confidence_sum / static_cast<double>(run.count)});
      merged_conf[run.label] = {run.confidence_sum, run.count};
    } else {
      auto& acc = merged_conf[run.label];
      acc.first += run.confidence_sum;
      acc.second += run.count;
      values.front().value += " " + run.text;
      values.front().confidence = acc.first / static_cast<double>(acc.second);
    }
  }
  return out;
}

}  // namespace realcred
