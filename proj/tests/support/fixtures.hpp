#pragma once

// Builders shared by the workflow, service and acceptance tests.

#include <algorithm>
#include <string>
#include <vector>

#include "realcred/process.hpp"
#include "realcred/reconcile.hpp"
#include "realcred/synthgen.hpp"

namespace realcred::testing {

/// Labeled stream of a gold document through the lossless channel.
inline LabeledTokenStream clean_stream(const GroundTruthDocument& gold) {
  const auto tokens = apply_noise(gold, NoiseProfile::identity(), gold.seed);
  return align_labels(gold, tokens);
}

inline DocumentSubmission token_submission(const LabeledTokenStream& stream) {
  DocumentSubmission s;
  s.doc_id = stream.doc_id;
  s.kind = stream.kind;
  s.payload = stream;
  return s;
}

inline std::vector<DocumentSubmission> case_batch(const DocumentCase& c) {
  return {token_submission(clean_stream(c.citizen_card)), token_submission(clean_stream(c.energy_certificate)),
          token_submission(clean_stream(c.property_record))};
}

/// Replaces every token of `label` by one token carrying `text`.
inline void set_label_text(LabeledTokenStream& stream, const std::string& label, const std::string& text) {
  auto first = std::find_if(stream.tokens.begin(), stream.tokens.end(),
                            [&](const LabeledToken& t) { return t.label == label; });
  if (first == stream.tokens.end()) return;
  first->token.text = text;
  const auto keep = static_cast<std::size_t>(first - stream.tokens.begin());
  std::vector<LabeledToken> out;
  for (std::size_t i = 0; i < stream.tokens.size(); ++i) {
    if (i == keep || stream.tokens[i].label != label) out.push_back(stream.tokens[i]);
  }
  stream.tokens = std::move(out);
}

/// A different NIF with a valid check digit.
inline std::string other_valid_nif(const std::string& nif) {
  std::string prefix = nif.substr(0, 8);
  prefix[1] = prefix[1] == '9' ? '0' : static_cast<char>(prefix[1] + 1);
  return prefix + static_cast<char>('0' + nif_check_digit(prefix));
}

/// A case whose citizen card NIF disagrees with the other two documents.
inline std::vector<DocumentSubmission> nif_mismatch_batch(const DocumentCase& c) {
  auto batch = case_batch(c);
  auto& cc = std::get<LabeledTokenStream>(batch[0].payload);
  const auto nif = c.citizen_card.values_of("NIF").front();
  set_label_text(cc, "NIF", other_valid_nif(nif));
  return batch;
}

}  // namespace realcred::testing
