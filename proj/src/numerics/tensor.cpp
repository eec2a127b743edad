#include "corrbridge/numerics/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace corrbridge {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

ShapeError::ShapeError(std::string op, const Shape& lhs, const Shape& rhs)
    : NumericsError(op + ": shape mismatch " + shape_string(lhs) + " vs " + shape_string(rhs)),
      op_(std::move(op)) {}

ShapeError::ShapeError(std::string op, const std::string& detail)
    : NumericsError(op + ": " + detail), op_(std::move(op)) {}

InstabilityError::InstabilityError(std::string op)
    : NumericsError(op + ": non-finite value in output (numeric instability)"), op_(std::move(op)) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad)
    : node_(std::make_shared<TensorNode<T>>()) {
  for (auto extent : shape) {
    if (extent == 0) throw ShapeError("tensor", "zero extent in shape " + shape_string(shape));
  }
  if (data.size() != element_count(shape)) {
    throw ShapeError("tensor", "data length " + std::to_string(data.size()) +
                                   " does not match shape " + shape_string(shape));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  auto n = element_count(shape);
  return Tensor(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::filled(Shape shape, T value) {
  auto n = element_count(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value) {
  return Tensor(Shape{}, std::vector<T>{value});
}

template <typename T>
Tensor<T> Tensor<T>::vector(std::vector<T> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

template <typename T>
Tensor<T> Tensor<T>::matrix(std::size_t rows, std::size_t cols, std::vector<T> values) {
  return Tensor(Shape{rows, cols}, std::move(values));
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("dim", "axis " + std::to_string(axis) + " out of range for " + shape_string(shape()));
  }
  return node_->shape[axis];
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw ShapeError("item", "tensor of shape " + shape_string(shape()) + " is not a scalar");
  return node_->data[0];
}

template <typename T>
T Tensor<T>::at(std::size_t row, std::size_t col) const {
  if (rank() != 2 || row >= dim(0) || col >= dim(1)) {
    throw ShapeError("at", "index (" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                               shape_string(shape()));
  }
  return node_->data[row * dim(1) + col];
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  if (node_->grad.size() != node_->data.size()) node_->grad.assign(node_->data.size(), T(0));
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  node_->grad.assign(node_->data.size(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->data, false);
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(node_->shape, node_->data, node_->requires_grad);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace corrbridge
