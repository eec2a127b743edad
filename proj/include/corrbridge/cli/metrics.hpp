#pragma once

#include <string>
#include <vector>

#include "corrbridge/data/corpus.hpp"

namespace corrbridge {

/// Fraction of hypotheses equal to any of their references after NFC
/// normalization. references[i] lists every accepted output for example i.
double compute_accuracy(const std::vector<std::string>& hypotheses,
                        const std::vector<std::vector<std::string>>& references);

/// For each line, every target paired with the same source anywhere in the
/// file (multi-reference test sets repeat the source).
std::vector<std::vector<std::string>> group_references(const std::vector<TextPair>& pairs);

struct PairAccuracy {
  std::string source;  // row label
  std::string target;  // column label
  double accuracy = 0.0;
};

/// Source x target accuracy grid in percent; '-' marks missing cells.
std::string format_accuracy_grid(const std::vector<PairAccuracy>& results);

}  // namespace corrbridge
