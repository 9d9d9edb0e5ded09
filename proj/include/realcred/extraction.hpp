#pragma once

#include <span>

#include "realcred/doc_model.hpp"
#include "realcred/synthgen.hpp"

namespace realcred {

inline constexpr int kDefaultRowTolerance = 8;

struct ExtractionOutcome {
  ExtractionResult result;
  /// Set when the stream carried no field labels at all.
  bool unlabeled = false;
};

/// Sorts a labeled stream into reading order, then joins consecutive tokens
/// of one label into a field value. Repeatable labels keep one value per
/// run; other labels merge their runs into a single value.
ExtractionOutcome extract_fields(const LabeledTokenStream& stream, int row_tolerance = kDefaultRowTolerance);

/// Permutation that `reading_order_sort` applies.
std::vector<std::size_t> reading_order_permutation(std::span<const Token> tokens, int row_tolerance);

}  // namespace realcred
