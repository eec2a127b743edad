#include "corrbridge/numerics/adam.hpp"

#include <cmath>

namespace corrbridge {

template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamSlot<T>& slot, const AdamConfig& config) {
  if (grad.size() != param.size()) {
    throw ShapeError("adam_step", "gradient length " + std::to_string(grad.size()) +
                                      " does not match parameter length " + std::to_string(param.size()));
  }
  if (slot.m.empty() && slot.v.empty()) {
    slot.m.assign(param.size(), T(0));
    slot.v.assign(param.size(), T(0));
  }
  if (slot.m.size() != param.size() || slot.v.size() != param.size()) {
    throw ShapeError("adam_step", "moment buffers of length " + std::to_string(slot.m.size()) +
                                      " do not match parameter length " + std::to_string(param.size()));
  }
  slot.t += 1;
  const T beta1 = static_cast<T>(config.beta1);
  const T beta2 = static_cast<T>(config.beta2);
  const T m_correction = static_cast<T>(1.0 - std::pow(config.beta1, static_cast<double>(slot.t)));
  const T v_correction = static_cast<T>(1.0 - std::pow(config.beta2, static_cast<double>(slot.t)));
  const T lr = static_cast<T>(config.learning_rate);
  const T eps = static_cast<T>(config.epsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    slot.m[i] = beta1 * slot.m[i] + (T(1) - beta1) * g;
    slot.v[i] = beta2 * slot.v[i] + (T(1) - beta2) * g * g;
    const T m_hat = slot.m[i] / m_correction;
    const T v_hat = slot.v[i] / v_correction;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

template <typename T>
void AdamState<T>::step(std::span<const NamedTensor<T>> params) {
  for (const auto& p : params) {
    Tensor<T> tensor = p.tensor;
    if (!tensor.has_grad()) tensor.zero_grad();
    adam_step<T>(tensor.mutable_data(), tensor.grad(), slots_[p.name], config_);
  }
}

template <typename T>
double grad_norm(std::span<const NamedTensor<T>> params) {
  double total = 0.0;
  for (const auto& p : params) {
    for (T g : p.tensor.grad()) total += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(total);
}

template <typename T>
double clip_grad_norm(std::span<const NamedTensor<T>> params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (const auto& p : params) {
      Tensor<T> tensor = p.tensor;
      if (!tensor.has_grad()) continue;
      for (T& g : tensor.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

template void adam_step<float>(std::span<float>, std::span<const float>, AdamSlot<float>&, const AdamConfig&);
template void adam_step<double>(std::span<double>, std::span<const double>, AdamSlot<double>&, const AdamConfig&);
template double grad_norm<float>(std::span<const NamedTensor<float>>);
template double grad_norm<double>(std::span<const NamedTensor<double>>);
template double clip_grad_norm<float>(std::span<const NamedTensor<float>>, double);
template double clip_grad_norm<double>(std::span<const NamedTensor<double>>, double);
template class AdamState<float>;
template class AdamState<double>;

}  // namespace corrbridge
