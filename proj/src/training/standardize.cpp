#include "corrbridge/training/standardize.hpp"

#include <cmath>
#include <numeric>

#include "corrbridge/numerics/ops.hpp"
#include "corrbridge/numerics/tape.hpp"

namespace corrbridge {

template <typename T>
StandardizationStats<T> StandardizationStats<T>::identity(std::size_t dim) {
  return StandardizationStats{std::vector<T>(dim, T(0)), std::vector<T>(dim, T(1))};
}

template <typename T>
Tensor<T> standardize(const Tensor<T>& h, const StandardizationStats<T>& stats) {
  if (h.rank() != 2 || h.dim(1) != stats.dim() || stats.var.size() != stats.dim()) {
    throw ShapeError("standardize", h.shape(), Shape{stats.dim()});
  }
  std::vector<T> stddev(stats.var.size());
  for (std::size_t d = 0; d < stddev.size(); ++d) stddev[d] = std::sqrt(stats.var[d]);
  auto centred = sub_row(h, Tensor<T>::vector(stats.mean));
  return div_row(centred, Tensor<T>::vector(std::move(stddev)));
}

template <typename T>
Tensor<T> normalized_correlation(const Tensor<T>& hx, const Tensor<T>& hz, const StandardizationStats<T>& stats_x,
                                 const StandardizationStats<T>& stats_z) {
  if (hx.shape() != hz.shape() || hx.rank() != 2) throw ShapeError("correlation_loss", hx.shape(), hz.shape());
  const T count = static_cast<T>(hx.dim(0) * hx.dim(1));
  auto inner = sum(standardize(hx, stats_x) * standardize(hz, stats_z));
  return scale(inner, T(1) / count);
}

template <typename T>
Tensor<T> correlation_loss(const Tensor<T>& hx, const Tensor<T>& hz, const StandardizationStats<T>& stats_x,
                           const StandardizationStats<T>& stats_z, double lambda) {
  return scale(normalized_correlation(hx, hz, stats_x, stats_z), static_cast<T>(-lambda));
}

template <typename T>
StandardizationStats<T> compute_stats(std::span<const T> reps, std::size_t dim, double var_floor) {
  if (dim == 0 || reps.empty() || reps.size() % dim != 0) {
    throw ShapeError("update_epoch_stats", "representation buffer of " + std::to_string(reps.size()) +
                                               " values is not a non-empty multiple of " + std::to_string(dim));
  }
  const std::size_t n = reps.size() / dim;
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += static_cast<double>(reps[i * dim + d]);
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      double c = static_cast<double>(reps[i * dim + d]) - mean[d];
      var[d] += c * c;
    }
  }
  StandardizationStats<T> stats;
  for (std::size_t d = 0; d < dim; ++d) {
    stats.mean.push_back(static_cast<T>(mean[d]));
    stats.var.push_back(static_cast<T>(std::max(var[d] / static_cast<double>(n), var_floor)));
  }
  return stats;
}

namespace {

template <typename T, typename EncodeBatch>
std::vector<T> encode_rows(std::size_t hidden_dim, std::span<const Example> inputs, std::size_t batch_size,
                           EncodeBatch&& encode_batch) {
  NoGradScope<T> no_grad;
  std::vector<T> out(inputs.size() * hidden_dim);
  for (std::size_t start = 0; start < inputs.size(); start += batch_size) {
    std::vector<std::size_t> idx(std::min(batch_size, inputs.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    auto batch = collate(inputs, idx);
    auto reps = encode_batch(batch);
    auto values = reps.data();
    for (std::size_t r = 0; r < batch.size(); ++r) {
      std::copy_n(values.data() + r * hidden_dim, hidden_dim, out.data() + batch.indices[r] * hidden_dim);
    }
  }
  return out;
}

}  // namespace

template <typename T>
std::vector<T> encode_all(const Encoder<T>& encoder, std::span<const Example> inputs, std::size_t batch_size) {
  return encode_rows<T>(encoder.hidden_dim(), inputs, batch_size,
                        [&](const Batch& b) { return encoder.encode_batch(b); });
}

template <typename T>
std::vector<T> encode_all(const SequenceEncoder<T>& encoder, std::span<const Example> inputs, std::size_t batch_size) {
  return encode_rows<T>(encoder.hidden_dim(), inputs, batch_size,
                        [&](const Batch& b) { return encoder.encode_batch(b.source); });
}

template <typename T>
StandardizationStats<T> update_epoch_stats(const Encoder<T>& encoder, std::span<const Example> inputs,
                                           double var_floor, std::size_t batch_size) {
  if (inputs.empty()) throw ShapeError("update_epoch_stats", "empty corpus");
  auto reps = encode_all(encoder, inputs, batch_size);
  return compute_stats<T>(reps, encoder.hidden_dim(), var_floor);
}

template <typename T>
StandardizationStats<T> update_epoch_stats(const SequenceEncoder<T>& encoder, std::span<const Example> inputs,
                                           double var_floor, std::size_t batch_size) {
  if (inputs.empty()) throw ShapeError("update_epoch_stats", "empty corpus");
  auto reps = encode_all(encoder, inputs, batch_size);
  return compute_stats<T>(reps, encoder.hidden_dim(), var_floor);
}

#define CORRBRIDGE_INSTANTIATE_STANDARDIZE(T)                                                                    \
  template struct StandardizationStats<T>;                                                                        \
  template Tensor<T> standardize(const Tensor<T>&, const StandardizationStats<T>&);                               \
  template Tensor<T> normalized_correlation(const Tensor<T>&, const Tensor<T>&, const StandardizationStats<T>&,   \
                                            const StandardizationStats<T>&);                                      \
  template Tensor<T> correlation_loss(const Tensor<T>&, const Tensor<T>&, const StandardizationStats<T>&,         \
                                      const StandardizationStats<T>&, double);                                    \
  template StandardizationStats<T> compute_stats(std::span<const T>, std::size_t, double);                        \
  template std::vector<T> encode_all(const Encoder<T>&, std::span<const Example>, std::size_t);                   \
  template std::vector<T> encode_all(const SequenceEncoder<T>&, std::span<const Example>, std::size_t);           \
  template StandardizationStats<T> update_epoch_stats(const Encoder<T>&, std::span<const Example>, double,        \
                                                      std::size_t);                                               \
  template StandardizationStats<T> update_epoch_stats(const SequenceEncoder<T>&, std::span<const Example>, double, \
                                                      std::size_t);

CORRBRIDGE_INSTANTIATE_STANDARDIZE(float)
CORRBRIDGE_INSTANTIATE_STANDARDIZE(double)

}  // namespace corrbridge
