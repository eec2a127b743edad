#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "corrbridge/numerics/tensor.hpp"

namespace corrbridge {

/// Eager reverse-mode tape. Ops executed while a tape is active (see
/// TapeScope) and touching a requires_grad input append an entry; backward()
/// replays the entries in reverse.
template <typename T>
class Tape {
 public:
  using NodePtr = std::shared_ptr<TensorNode<T>>;
  using BackwardFn = std::function<void()>;

  struct Entry {
    std::string op;
    std::vector<NodePtr> inputs;
    NodePtr output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::string op, std::vector<NodePtr> inputs, NodePtr output, BackwardFn backward);

  /// Overwrites the gradient of every requires_grad tensor seen by this tape
  /// with d(loss)/d(tensor). Single use.
  void backward(const Tensor<T>& loss);

  std::size_t size() const noexcept { return entries_.size(); }
  bool consumed() const noexcept { return consumed_; }

 private:
  std::vector<Entry> entries_;
  bool consumed_ = false;
};

template <typename T>
Tape<T>* active_tape() noexcept;

/// Makes a tape the active tape of the calling thread for the scope lifetime.
template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

/// Suspends recording on the calling thread (inference paths).
template <typename T>
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<T>* previous_;
};

template <typename T>
void backward(Tape<T>& tape, const Tensor<T>& loss) {
  tape.backward(loss);
}

extern template class Tape<float>;
extern template class Tape<double>;
extern template class TapeScope<float>;
extern template class TapeScope<double>;
extern template class NoGradScope<float>;
extern template class NoGradScope<double>;

}  // namespace corrbridge
