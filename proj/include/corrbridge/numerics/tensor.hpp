#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace corrbridge {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when operand shapes do not conform; names the op and both shapes.
class ShapeError : public NumericsError {
 public:
  ShapeError(std::string op, const Shape& lhs, const Shape& rhs);
  ShapeError(std::string op, const std::string& detail);

  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

/// Raised when an op produces NaN or Inf from finite inputs.
class InstabilityError : public NumericsError {
 public:
  explicit InstabilityError(std::string op);

  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

class TapeError : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
};

/// Shared handle to a dense row-major array with an optional gradient slot.
///
/// Copies of a Tensor alias the same storage. Values are treated as immutable
/// once an op has consumed them; only parameters are updated in place, and
/// only by an optimizer or a finite-difference probe.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, T value);
  static Tensor scalar(T value);
  static Tensor vector(std::vector<T> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<T> values);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->data.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  T item() const;
  T at(std::size_t i) const { return node_->data.at(i); }
  T at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  /// Allocates a zero gradient buffer on first use.
  std::span<T> mutable_grad();
  void zero_grad();

  /// Deep copy of values; the copy never requires grad.
  Tensor detach() const;
  /// Deep copy of values preserving requires_grad; gradient is not copied.
  Tensor clone() const;

  const std::shared_ptr<TensorNode<T>>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<TensorNode<T>> node_;
};

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
using ParameterList = std::vector<NamedTensor<T>>;

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace corrbridge
