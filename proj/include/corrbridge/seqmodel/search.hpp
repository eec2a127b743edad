#pragma once

#include <vector>

#include "corrbridge/seqmodel/modules.hpp"

namespace corrbridge {

struct Hypothesis {
  std::vector<int> tokens;  // excludes BOS and EOS
  double score = 0.0;       // sum of log-probabilities, EOS included when finished
  bool finished = false;
};

/// Argmax decoding from BOS, stopping at EOS or after max_len tokens.
/// PAD and BOS are never emitted; ties go to the lower token id.
template <typename T>
Hypothesis decode_greedy(const Decoder<T>& decoder, const Tensor<T>& rep, std::size_t max_len);

/// Length-bounded beam search over summed log-probabilities. Hypotheses that
/// emit EOS leave the beam; the best finished one is returned, else the best
/// running one at the length cap. Equal scores prefer the sequence whose
/// earliest differing token is lower.
template <typename T>
Hypothesis decode_beam(const Decoder<T>& decoder, const Tensor<T>& rep, std::size_t beam_width,
                       std::size_t max_len);

/// Greedy when beam_width == 1, beam search otherwise.
template <typename T>
Hypothesis decode(const Decoder<T>& decoder, const Tensor<T>& rep, std::size_t beam_width, std::size_t max_len);

}  // namespace corrbridge
