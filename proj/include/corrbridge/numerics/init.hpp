#pragma once

#include <cstdint>
#include <random>

#include "corrbridge/numerics/tensor.hpp"

namespace corrbridge {

using Rng = std::mt19937_64;

inline constexpr double kInitRange = 0.08;

/// Fills `t` with values drawn uniformly from [-range, range].
template <typename T>
void uniform_fill(Tensor<T>& t, Rng& rng, double range = kInitRange);

/// A requires_grad weight of the given shape, uniform in [-kInitRange, kInitRange].
template <typename T>
Tensor<T> make_weight(Shape shape, Rng& rng);

/// A requires_grad zero bias.
template <typename T>
Tensor<T> make_bias(std::size_t size);

}  // namespace corrbridge
