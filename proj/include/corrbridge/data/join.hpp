#pragma once

#include <string>
#include <vector>

#include "corrbridge/data/corpus.hpp"

namespace corrbridge {

struct PivotJoin {
  std::vector<TextPair> pairs;
  std::size_t unmatched_a = 0;  // pivot keys of A absent from B
  std::size_t unmatched_b = 0;
};

/// Given A = {(e, a)} and B = {(e, b)} keyed on the pivot e, emits (a, b) for
/// every shared key; repeated keys produce the cross product. Output follows
/// A's order. Throws DataError when no key is shared.
PivotJoin join_on_pivot(const std::vector<TextPair>& a, const std::vector<TextPair>& b);

}  // namespace corrbridge
