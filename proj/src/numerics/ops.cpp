#include "corrbridge/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "corrbridge/numerics/tape.hpp"

namespace corrbridge {

namespace {

template <typename T>
using NodePtr = std::shared_ptr<TensorNode<T>>;

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Eigen::Map<RowMajor<T>> as_matrix(std::vector<T>& v, std::size_t rows, std::size_t cols) {
  return Eigen::Map<RowMajor<T>>(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
Eigen::Map<const RowMajor<T>> as_matrix(const std::vector<T>& v, std::size_t rows, std::size_t cols) {
  return Eigen::Map<const RowMajor<T>>(v.data(), static_cast<Eigen::Index>(rows),
                                       static_cast<Eigen::Index>(cols));
}

template <typename T>
Tensor<T> finish(const char* op, Shape shape, std::vector<T> data) {
  for (const T& x : data) {
    if (!std::isfinite(x)) throw InstabilityError(op);
  }
  return Tensor<T>(std::move(shape), std::move(data));
}

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> inputs) {
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor<T>* t) { return t->requires_grad(); });
}

// Registers `result` on the active tape when any input requires grad.
template <typename T, typename Fn>
void attach(const char* op, std::vector<NodePtr<T>> inputs, Tensor<T>& result, Fn&& backward_fn) {
  Tape<T>* tape = active_tape<T>();
  if (tape == nullptr) return;
  bool needed = std::any_of(inputs.begin(), inputs.end(), [](const NodePtr<T>& n) { return n->requires_grad; });
  if (!needed) return;
  result.set_requires_grad(true);
  tape->record(op, std::move(inputs), result.node(), std::forward<Fn>(backward_fn));
}

template <typename T>
void require_rank(const char* op, const Tensor<T>& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(op, "expected rank " + std::to_string(rank) + ", got " + shape_string(t.shape()));
  }
}

template <typename T>
void require_same(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError(op, a.shape(), b.shape());
}

template <typename T>
void require_row_vector(const char* op, const Tensor<T>& a, const Tensor<T>& v) {
  require_rank(op, a, 2);
  if (v.rank() != 1 || v.dim(0) != a.dim(1)) throw ShapeError(op, a.shape(), v.shape());
}

template <typename T, typename Forward, typename Derivative>
Tensor<T> unary(const char* op, const Tensor<T>& a, Forward f, Derivative df) {
  std::vector<T> out(a.size());
  auto in = a.data();
  std::transform(in.begin(), in.end(), out.begin(), f);
  auto result = finish(op, a.shape(), std::move(out));
  auto an = a.node();
  auto on = result.node();
  attach<T>(op, {an}, result, [an, on, df] {
    if (!an->requires_grad) return;
    for (std::size_t i = 0; i < an->data.size(); ++i) {
      an->grad[i] += on->grad[i] * df(an->data[i], on->data[i]);
    }
  });
  return result;
}

// Splits a tensor of rank >= 1 into rows over its last axis.
template <typename T>
std::pair<std::size_t, std::size_t> rows_cols(const char* op, const Tensor<T>& a) {
  if (a.rank() == 0) throw ShapeError(op, "expected rank >= 1, got a scalar");
  std::size_t cols = a.shape().back();
  return {a.size() / cols, cols};
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  if (a.dim(1) != b.dim(0)) throw ShapeError("matmul", a.shape(), b.shape());
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<T> out(m * n);
  as_matrix(out, m, n).noalias() = as_matrix(a.node()->data, m, k) * as_matrix(b.node()->data, k, n);
  auto result = finish("matmul", Shape{m, n}, std::move(out));
  auto an = a.node(), bn = b.node(), on = result.node();
  attach<T>("matmul", {an, bn}, result, [an, bn, on, m, k, n] {
    auto g = as_matrix(std::as_const(on->grad), m, n);
    if (an->requires_grad) {
      as_matrix(an->grad, m, k).noalias() += g * as_matrix(std::as_const(bn->data), k, n).transpose();
    }
    if (bn->requires_grad) {
      as_matrix(bn->grad, k, n).noalias() += as_matrix(std::as_const(an->data), m, k).transpose() * g;
    }
  });
  return result;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("add", a, b);
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  auto result = finish("add", a.shape(), std::move(out));
  auto an = a.node(), bn = b.node(), on = result.node();
  attach<T>("add", {an, bn}, result, [an, bn, on] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += on->grad[i];
      if (bn->requires_grad) bn->grad[i] += on->grad[i];
    }
  });
  return result;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("sub", a, b);
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  auto result = finish("sub", a.shape(), std::move(out));
  auto an = a.node(), bn = b.node(), on = result.node();
  attach<T>("sub", {an, bn}, result, [an, bn, on] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += on->grad[i];
      if (bn->requires_grad) bn->grad[i] -= on->grad[i];
    }
  });
  return result;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("mul", a, b);
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto result = finish("mul", a.shape(), std::move(out));
  auto an = a.node(), bn = b.node(), on = result.node();
  attach<T>("mul", {an, bn}, result, [an, bn, on] {
    for (std::size_t i = 0; i < on->grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += on->grad[i] * bn->data[i];
      if (bn->requires_grad) bn->grad[i] += on->grad[i] * an->data[i];
    }
  });
  return result;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  return unary<T>(
      "scale", a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& v) {
  require_row_vector("add_row", a, v);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.data()[i * n + j] + v.data()[j];
  auto result = finish("add_row", a.shape(), std::move(out));
  auto an = a.node(), vn = v.node(), on = result.node();
  attach<T>("add_row", {an, vn}, result, [an, vn, on, m, n] {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        T g = on->grad[i * n + j];
        if (an->requires_grad) an->grad[i * n + j] += g;
        if (vn->requires_grad) vn->grad[j] += g;
      }
    }
  });
  return result;
}

template <typename T>
Tensor<T> sub_row(const Tensor<T>& a, const Tensor<T>& v) {
  require_row_vector("sub_row", a, v);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.data()[i * n + j] - v.data()[j];
  auto result = finish("sub_row", a.shape(), std::move(out));
  auto an = a.node(), vn = v.node(), on = result.node();
  attach<T>("sub_row", {an, vn}, result, [an, vn, on, m, n] {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        T g = on->grad[i * n + j];
        if (an->requires_grad) an->grad[i * n + j] += g;
        if (vn->requires_grad) vn->grad[j] -= g;
      }
    }
  });
  return result;
}

template <typename T>
Tensor<T> div_row(const Tensor<T>& a, const Tensor<T>& v) {
  require_row_vector("div_row", a, v);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.data()[i * n + j] / v.data()[j];
  auto result = finish("div_row", a.shape(), std::move(out));
  auto an = a.node(), vn = v.node(), on = result.node();
  attach<T>("div_row", {an, vn}, result, [an, vn, on, m, n] {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        T g = on->grad[i * n + j];
        T d = vn->data[j];
        if (an->requires_grad) an->grad[i * n + j] += g / d;
        if (vn->requires_grad) vn->grad[j] -= g * an->data[i * n + j] / (d * d);
      }
    }
  });
  return result;
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  return unary<T>(
      "tanh", a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return unary<T>(
      "sigmoid", a,
      [](T x) {
        if (x >= 0) return T(1) / (T(1) + std::exp(-x));
        T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& a) {
  auto [rows, cols] = rows_cols("softmax", a);
  std::vector<T> out(a.size());
  auto in = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = in.data() + r * cols;
    T* y = out.data() + r * cols;
    T mx = *std::max_element(x, x + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      total += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= total;
  }
  auto result = finish("softmax", a.shape(), std::move(out));
  auto an = a.node(), on = result.node();
  attach<T>("softmax", {an}, result, [an, on, rows = rows, cols = cols] {
    if (!an->requires_grad) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const T* y = on->data.data() + r * cols;
      const T* g = on->grad.data() + r * cols;
      T dot = 0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) an->grad[r * cols + c] += y[c] * (g[c] - dot);
    }
  });
  return result;
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& a) {
  auto [rows, cols] = rows_cols("log_softmax", a);
  const T floor = static_cast<T>(std::log(kProbabilityFloor));
  std::vector<T> out(a.size());
  auto in = a.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = in.data() + r * cols;
    T* y = out.data() + r * cols;
    T mx = *std::max_element(x, x + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(x[c] - mx);
    T lse = mx + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) y[c] = std::max(x[c] - lse, floor);
  }
  auto result = finish("log_softmax", a.shape(), std::move(out));
  auto an = a.node(), on = result.node();
  attach<T>("log_softmax", {an}, result, [an, on, floor, rows = rows, cols = cols] {
    if (!an->requires_grad) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const T* x = an->data.data() + r * cols;
      const T* y = on->data.data() + r * cols;
      const T* g = on->grad.data() + r * cols;
      T mx = *std::max_element(x, x + cols);
      T total = 0;
      for (std::size_t c = 0; c < cols; ++c) total += std::exp(x[c] - mx);
      T lse = mx + std::log(total);
      // Floored outputs are constant and pass no gradient.
      T live_sum = 0;
      for (std::size_t c = 0; c < cols; ++c) {
        if (y[c] > floor) live_sum += g[c];
      }
      for (std::size_t c = 0; c < cols; ++c) {
        T p = std::exp(x[c] - lse);
        T own = y[c] > floor ? g[c] : T(0);
        an->grad[r * cols + c] += own - p * live_sum;
      }
    }
  });
  return result;
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
  const T floor = static_cast<T>(kProbabilityFloor);
  return unary<T>(
      "log", a, [floor](T x) { return std::log(std::max(x, floor)); },
      [floor](T x, T) { return x > floor ? T(1) / x : T(0); });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const int> ids) {
  require_rank("gather_rows", table, 2);
  if (ids.empty()) throw ShapeError("gather_rows", "empty id list");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw ShapeError("gather_rows", "id " + std::to_string(id) + " out of range for table " +
                                          shape_string(table.shape()));
    }
  }
  std::vector<T> out(ids.size() * width);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(table.data().data() + static_cast<std::size_t>(ids[i]) * width, width, out.data() + i * width);
  }
  auto result = finish("gather_rows", Shape{ids.size(), width}, std::move(out));
  auto tn = table.node(), on = result.node();
  std::vector<int> index(ids.begin(), ids.end());
  attach<T>("gather_rows", {tn}, result, [tn, on, index = std::move(index), width] {
    if (!tn->requires_grad) return;
    for (std::size_t i = 0; i < index.size(); ++i) {
      T* dst = tn->grad.data() + static_cast<std::size_t>(index[i]) * width;
      const T* src = on->grad.data() + i * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
    }
  });
  return result;
}

template <typename T>
Tensor<T> pick(const Tensor<T>& a, std::span<const int> columns) {
  require_rank("pick", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (columns.size() != m) {
    throw ShapeError("pick", "expected " + std::to_string(m) + " column indices, got " +
                                 std::to_string(columns.size()));
  }
  std::vector<T> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    int c = columns[i];
    if (c < 0 || static_cast<std::size_t>(c) >= n) {
      throw ShapeError("pick", "column " + std::to_string(c) + " out of range for " + shape_string(a.shape()));
    }
    out[i] = a.data()[i * n + static_cast<std::size_t>(c)];
  }
  auto result = finish("pick", Shape{m}, std::move(out));
  auto an = a.node(), on = result.node();
  std::vector<int> index(columns.begin(), columns.end());
  attach<T>("pick", {an}, result, [an, on, index = std::move(index), n] {
    if (!an->requires_grad) return;
    for (std::size_t i = 0; i < index.size(); ++i) {
      an->grad[i * n + static_cast<std::size_t>(index[i])] += on->grad[i];
    }
  });
  return result;
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols", "no inputs");
  const std::size_t m = parts.front().rank() == 2 ? parts.front().dim(0) : 0;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank("concat_cols", p, 2);
    if (p.dim(0) != m) throw ShapeError("concat_cols", parts.front().shape(), p.shape());
    total += p.dim(1);
  }
  std::vector<T> out(m * total);
  std::vector<NodePtr<T>> nodes;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(1);
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(p.data().data() + i * w, w, out.data() + i * total + offset);
    }
    nodes.push_back(p.node());
    offsets.push_back(offset);
    offset += w;
  }
  auto result = finish("concat_cols", Shape{m, total}, std::move(out));
  auto on = result.node();
  attach<T>("concat_cols", nodes, result, [nodes, offsets, on, m, total] {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      auto& in = nodes[k];
      if (!in->requires_grad) continue;
      const std::size_t w = in->shape[1];
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < w; ++c) in->grad[i * w + c] += on->grad[i * total + offsets[k] + c];
      }
    }
  });
  return result;
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, std::size_t begin, std::size_t end) {
  require_rank("slice_cols", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (begin >= end || end > n) {
    throw ShapeError("slice_cols", "range [" + std::to_string(begin) + "," + std::to_string(end) +
                                       ") invalid for " + shape_string(a.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<T> out(m * w);
  for (std::size_t i = 0; i < m; ++i) std::copy_n(a.data().data() + i * n + begin, w, out.data() + i * w);
  auto result = finish("slice_cols", Shape{m, w}, std::move(out));
  auto an = a.node(), on = result.node();
  attach<T>("slice_cols", {an}, result, [an, on, m, n, w, begin] {
    if (!an->requires_grad) return;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < w; ++c) an->grad[i * n + begin + c] += on->grad[i * w + c];
    }
  });
  return result;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (element_count(shape) != a.size()) throw ShapeError("reshape", a.shape(), shape);
  auto result = finish("reshape", std::move(shape), std::vector<T>(a.data().begin(), a.data().end()));
  auto an = a.node(), on = result.node();
  attach<T>("reshape", {an}, result, [an, on] {
    if (!an->requires_grad) return;
    for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
  });
  return result;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total = 0;
  for (T x : a.data()) total += x;
  auto result = finish("sum", Shape{}, std::vector<T>{total});
  auto an = a.node(), on = result.node();
  attach<T>("sum", {an}, result, [an, on] {
    if (!an->requires_grad) return;
    for (auto& g : an->grad) g += on->grad[0];
  });
  return result;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  T total = 0;
  for (T x : a.data()) total += x;
  const T count = static_cast<T>(a.size());
  auto result = finish("mean", Shape{}, std::vector<T>{total / count});
  auto an = a.node(), on = result.node();
  attach<T>("mean", {an}, result, [an, on, count] {
    if (!an->requires_grad) return;
    for (auto& g : an->grad) g += on->grad[0] / count;
  });
  return result;
}

#define CORRBRIDGE_INSTANTIATE_OPS(T)                                                      \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> scale(const Tensor<T>&, T);                                           \
  template Tensor<T> add_row(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> sub_row(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> div_row(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> tanh(const Tensor<T>&);                                               \
  template Tensor<T> sigmoid(const Tensor<T>&);                                            \
  template Tensor<T> softmax(const Tensor<T>&);                                            \
  template Tensor<T> log_softmax(const Tensor<T>&);                                        \
  template Tensor<T> log(const Tensor<T>&);                                                \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const int>);                  \
  template Tensor<T> pick(const Tensor<T>&, std::span<const int>);                         \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);                           \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);               \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                     \
  template Tensor<T> sum(const Tensor<T>&);                                                \
  template Tensor<T> mean(const Tensor<T>&);

CORRBRIDGE_INSTANTIATE_OPS(float)
CORRBRIDGE_INSTANTIATE_OPS(double)

}  // namespace corrbridge
