#include "corrbridge/numerics/tape.hpp"

#include <algorithm>

namespace corrbridge {

namespace {

template <typename T>
Tape<T>*& active_slot() noexcept {
  thread_local Tape<T>* tape = nullptr;
  return tape;
}

}  // namespace

template <typename T>
Tape<T>* active_tape() noexcept {
  return active_slot<T>();
}

template <typename T>
TapeScope<T>::TapeScope(Tape<T>& tape) : previous_(active_slot<T>()) {
  if (tape.consumed()) throw TapeError("tape: cannot activate a consumed tape");
  active_slot<T>() = &tape;
}

template <typename T>
TapeScope<T>::~TapeScope() {
  active_slot<T>() = previous_;
}

template <typename T>
NoGradScope<T>::NoGradScope() : previous_(active_slot<T>()) {
  active_slot<T>() = nullptr;
}

template <typename T>
NoGradScope<T>::~NoGradScope() {
  active_slot<T>() = previous_;
}

template <typename T>
void Tape<T>::record(std::string op, std::vector<NodePtr> inputs, NodePtr output, BackwardFn backward) {
  if (consumed_) throw TapeError("tape: recording '" + op + "' on a consumed tape");
  entries_.push_back(Entry{std::move(op), std::move(inputs), std::move(output), std::move(backward)});
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (consumed_) throw TapeError("backward: tape already consumed");
  if (!loss.defined() || loss.size() != 1) {
    throw TapeError("backward: loss must be a scalar, got shape " +
                    (loss.defined() ? shape_string(loss.shape()) : std::string("<undefined>")));
  }
  const auto& root = loss.node();
  auto produced = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Entry& e) { return e.output == root; });
  if (produced == entries_.end()) throw TapeError("backward: loss was not produced under this tape");

  for (auto& entry : entries_) {
    for (auto& in : entry.inputs) {
      if (in->requires_grad) in->grad.assign(in->data.size(), T(0));
    }
    entry.output->grad.assign(entry.output->data.size(), T(0));
  }
  root->grad[0] = T(1);

  // Entries after the loss cannot contribute to it.
  auto last = std::next(produced);
  for (auto it = std::make_reverse_iterator(last); it != entries_.rend(); ++it) {
    it->backward();
  }
  consumed_ = true;
  entries_.clear();
  entries_.shrink_to_fit();
}

template Tape<float>* active_tape<float>() noexcept;
template Tape<double>* active_tape<double>() noexcept;
template class Tape<float>;
template class Tape<double>;
template class TapeScope<float>;
template class TapeScope<double>;
template class NoGradScope<float>;
template class NoGradScope<double>;

}  // namespace corrbridge
