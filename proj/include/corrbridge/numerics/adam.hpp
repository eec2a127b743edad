#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corrbridge/numerics/tensor.hpp"

namespace corrbridge {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers and step counter for one parameter tensor.
template <typename T>
struct AdamSlot {
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update of `param` in place.
template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamSlot<T>& slot, const AdamConfig& config);

/// Named per-parameter Adam state. step() only advances the slots of the
/// parameters it is given, so disjoint parameter groups can be stepped by
/// different objectives without momentum leaking across them.
template <typename T>
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig config) : config_(config) {}

  void step(std::span<const NamedTensor<T>> params);

  const AdamConfig& config() const noexcept { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  const std::map<std::string, AdamSlot<T>>& slots() const noexcept { return slots_; }
  std::map<std::string, AdamSlot<T>>& slots() noexcept { return slots_; }

 private:
  AdamConfig config_;
  std::map<std::string, AdamSlot<T>> slots_;
};

/// Global L2 norm over the gradients of `params` (missing grads count as 0).
template <typename T>
double grad_norm(std::span<const NamedTensor<T>> params);

/// Rescales gradients so their global norm is at most `max_norm`. Returns the
/// norm measured before clipping.
template <typename T>
double clip_grad_norm(std::span<const NamedTensor<T>> params, double max_norm);

extern template class AdamState<float>;
extern template class AdamState<double>;

}  // namespace corrbridge
