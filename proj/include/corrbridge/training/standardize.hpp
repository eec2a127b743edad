#pragma once

#include <span>
#include <vector>

#include "corrbridge/data/corpus.hpp"
#include "corrbridge/numerics/tensor.hpp"
#include "corrbridge/seqmodel/modules.hpp"

namespace corrbridge {

inline constexpr double kDefaultVarFloor = 1e-6;

/// Per-dimension mean and variance of one encoder's representations. Frozen
/// for an epoch and recomputed at its end.
template <typename T>
struct StandardizationStats {
  std::vector<T> mean;
  std::vector<T> var;

  /// Zero mean, unit variance: the state before the first epoch ends.
  static StandardizationStats identity(std::size_t dim);

  std::size_t dim() const noexcept { return mean.size(); }
};

/// (h - mean) / sqrt(var) per column. Stats are constants: gradients flow to
/// h only.
template <typename T>
Tensor<T> standardize(const Tensor<T>& h, const StandardizationStats<T>& stats);

/// Sum over the batch of <s(hx_i), s(hz_i)>, divided by (batch * dim).
template <typename T>
Tensor<T> normalized_correlation(const Tensor<T>& hx, const Tensor<T>& hz, const StandardizationStats<T>& stats_x,
                                 const StandardizationStats<T>& stats_z);

/// -lambda * normalized_correlation.
template <typename T>
Tensor<T> correlation_loss(const Tensor<T>& hx, const Tensor<T>& hz, const StandardizationStats<T>& stats_x,
                           const StandardizationStats<T>& stats_z, double lambda);

/// Population mean/variance over the rows of `reps` ([n, d] row-major),
/// with the variance floored at var_floor.
template <typename T>
StandardizationStats<T> compute_stats(std::span<const T> reps, std::size_t dim, double var_floor);

/// Encodes every input with `encoder` (parameters as they are now) and
/// returns the statistics of the representations.
template <typename T>
StandardizationStats<T> update_epoch_stats(const Encoder<T>& encoder, std::span<const Example> inputs,
                                           double var_floor = kDefaultVarFloor, std::size_t batch_size = 256);

/// Representations of `inputs` as an [n, hidden] row-major buffer, in input
/// order, computed without recording.
template <typename T>
std::vector<T> encode_all(const Encoder<T>& encoder, std::span<const Example> inputs, std::size_t batch_size = 256);
template <typename T>
std::vector<T> encode_all(const SequenceEncoder<T>& encoder, std::span<const Example> inputs,
                          std::size_t batch_size = 256);

template <typename T>
StandardizationStats<T> update_epoch_stats(const SequenceEncoder<T>& encoder, std::span<const Example> inputs,
                                           double var_floor = kDefaultVarFloor, std::size_t batch_size = 256);

}  // namespace corrbridge
