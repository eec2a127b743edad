#pragma once

#include <span>
#include <vector>

#include "corrbridge/numerics/tensor.hpp"

// Differentiable ops. Every op validates shapes (ShapeError), checks its
// output for NaN/Inf (InstabilityError), and records itself on the active
// tape when any input requires grad.

namespace corrbridge {

/// Lower bound applied to probabilities before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);

// Row-broadcast ops: a is [m, n], v is [n].
template <typename T> Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& v);
template <typename T> Tensor<T> sub_row(const Tensor<T>& a, const Tensor<T>& v);
template <typename T> Tensor<T> div_row(const Tensor<T>& a, const Tensor<T>& v);

template <typename T> Tensor<T> tanh(const Tensor<T>& a);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& a);
/// Softmax over the last axis, max-subtracted.
template <typename T> Tensor<T> softmax(const Tensor<T>& a);
/// log(softmax) over the last axis, floored at log(kProbabilityFloor).
template <typename T> Tensor<T> log_softmax(const Tensor<T>& a);
/// log(max(a, kProbabilityFloor)).
template <typename T> Tensor<T> log(const Tensor<T>& a);

/// Embedding lookup: rows of table [V, d] selected by ids -> [n, d].
template <typename T> Tensor<T> gather_rows(const Tensor<T>& table, std::span<const int> ids);
/// a is [m, n]; picks a[i, columns[i]] -> [m].
template <typename T> Tensor<T> pick(const Tensor<T>& a, std::span<const int> columns);

template <typename T> Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);
template <typename T> Tensor<T> slice_cols(const Tensor<T>& a, std::size_t begin, std::size_t end);
template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);

template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

// Operator sugar for the common elementwise ops.
template <typename T> Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) { return add(a, b); }
template <typename T> Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) { return sub(a, b); }
template <typename T> Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) { return mul(a, b); }

}  // namespace corrbridge
