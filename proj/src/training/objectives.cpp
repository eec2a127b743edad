#include "corrbridge/training/objectives.hpp"

#include "corrbridge/numerics/ops.hpp"

namespace corrbridge {

template <typename T>
Tensor<T> batch_cross_entropy(const Decoder<T>& decoder, const Tensor<T>& reps, const SequenceBatch& targets) {
  for (std::size_t b = 0; b < targets.batch_size; ++b) {
    if (targets.lengths[b] < 2) {
      throw ShapeError("batch_cross_entropy", "row " + std::to_string(b) + " has no real target token");
    }
  }
  auto per_example = decoder.nll(reps, targets);
  return scale(sum(per_example), T(1) / static_cast<T>(targets.batch_size));
}

template Tensor<float> batch_cross_entropy(const Decoder<float>&, const Tensor<float>&, const SequenceBatch&);
template Tensor<double> batch_cross_entropy(const Decoder<double>&, const Tensor<double>&, const SequenceBatch&);

}  // namespace corrbridge
