#pragma once

#include <atomic>
#include <span>
#include <string>
#include <variant>

#include "corrbridge/data/batch.hpp"
#include "corrbridge/numerics/init.hpp"
#include "corrbridge/numerics/tensor.hpp"

namespace corrbridge {

/// Counts forward invocations; lets tests audit which components an
/// inference path touched.
class InvocationCounter {
 public:
  InvocationCounter() = default;
  InvocationCounter(const InvocationCounter& other) noexcept : count_(other.count()) {}
  InvocationCounter& operator=(const InvocationCounter& other) noexcept {
    count_.store(other.count());
    return *this;
  }

  void bump() const { count_.fetch_add(1, std::memory_order_relaxed); }
  std::size_t count() const { return count_.load(std::memory_order_relaxed); }
  void reset() const { count_.store(0); }

 private:
  mutable std::atomic<std::size_t> count_{0};
};

/// Single-layer GRU cell: h' = h + u * (c - h), with
/// u = sigmoid(x Wu + h Uu + bu), r = sigmoid(x Wr + h Ur + br),
/// c = tanh(x Wc + (r * h) Uc + bc).
template <typename T>
struct GruCell {
  Tensor<T> w_input;      // [input, 3H] update | reset | candidate
  Tensor<T> w_gates;      // [H, 2H] update | reset
  Tensor<T> w_candidate;  // [H, H]
  Tensor<T> bias;         // [3H]

  static GruCell create(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

  std::size_t input_dim() const { return w_input.dim(0); }
  std::size_t hidden_dim() const { return w_candidate.dim(0); }

  Tensor<T> step(const Tensor<T>& x, const Tensor<T>& h) const;
  void collect(const std::string& prefix, ParameterList<T>& out) const;
  GruCell clone() const;
};

/// Token-sequence encoder; the representation is the final GRU state.
template <typename T>
struct SequenceEncoder {
  Tensor<T> embedding;  // [vocab, embed]
  GruCell<T> cell;
  InvocationCounter calls;

  SequenceEncoder(std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden_dim, Rng& rng);
  SequenceEncoder(SequenceEncoder&&) noexcept = default;
  SequenceEncoder& operator=(SequenceEncoder&&) noexcept = default;

  std::size_t vocab_size() const { return embedding.dim(0); }
  std::size_t hidden_dim() const { return cell.hidden_dim(); }

  /// [hidden]. Throws on an empty sequence or an out-of-range id.
  Tensor<T> encode(std::span<const int> ids) const;
  /// [batch, hidden]; each row stops updating after its last real token.
  Tensor<T> encode_batch(const SequenceBatch& batch) const;

  ParameterList<T> parameters(const std::string& prefix) const;
  SequenceEncoder clone() const;

 private:
  SequenceEncoder() = default;
  SequenceEncoder(const SequenceEncoder&) = default;
};

/// Feed-forward encoder over fixed-length feature vectors: tanh(x W + b).
template <typename T>
struct VectorEncoder {
  Tensor<T> weight;  // [features, hidden]
  Tensor<T> bias;    // [hidden]
  InvocationCounter calls;

  VectorEncoder(std::size_t feature_dim, std::size_t hidden_dim, Rng& rng);
  VectorEncoder(VectorEncoder&&) noexcept = default;
  VectorEncoder& operator=(VectorEncoder&&) noexcept = default;

  std::size_t feature_dim() const { return weight.dim(0); }
  std::size_t hidden_dim() const { return weight.dim(1); }

  Tensor<T> encode(std::span<const double> features) const;
  /// features is [rows, feature_dim] row-major.
  Tensor<T> encode_batch(std::span<const double> features, std::size_t rows) const;

  ParameterList<T> parameters(const std::string& prefix) const;
  VectorEncoder clone() const;

 private:
  VectorEncoder() = default;
  VectorEncoder(const VectorEncoder&) = default;
};

/// Either encoder kind behind one interface, for views that may be text or
/// feature vectors.
template <typename T>
class Encoder {
 public:
  Encoder(SequenceEncoder<T> encoder) : impl_(std::move(encoder)) {}
  Encoder(VectorEncoder<T> encoder) : impl_(std::move(encoder)) {}

  ViewKind kind() const { return impl_.index() == 0 ? ViewKind::Sequence : ViewKind::Vector; }
  std::size_t hidden_dim() const;

  Tensor<T> encode(const Example& example) const;
  Tensor<T> encode_batch(const Batch& batch) const;

  ParameterList<T> parameters(const std::string& prefix) const;
  Encoder clone() const;
  const InvocationCounter& calls() const;

  SequenceEncoder<T>& sequence() { return std::get<SequenceEncoder<T>>(impl_); }
  const SequenceEncoder<T>& sequence() const { return std::get<SequenceEncoder<T>>(impl_); }
  VectorEncoder<T>& vector() { return std::get<VectorEncoder<T>>(impl_); }
  const VectorEncoder<T>& vector() const { return std::get<VectorEncoder<T>>(impl_); }

 private:
  std::variant<SequenceEncoder<T>, VectorEncoder<T>> impl_;
};

/// GRU decoder whose initial hidden state is the encoder representation.
template <typename T>
struct Decoder {
  Tensor<T> embedding;  // [vocab, embed]
  GruCell<T> cell;
  Tensor<T> w_out;      // [hidden, vocab]
  Tensor<T> b_out;      // [vocab]
  InvocationCounter calls;

  Decoder(std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden_dim, Rng& rng);
  Decoder(Decoder&&) noexcept = default;
  Decoder& operator=(Decoder&&) noexcept = default;

  std::size_t vocab_size() const { return embedding.dim(0); }
  std::size_t hidden_dim() const { return cell.hidden_dim(); }

  /// Feeds one token per row: h [k, H] -> h' [k, H].
  Tensor<T> step(const Tensor<T>& h, std::span<const int> previous) const;
  /// [k, vocab] log-probabilities.
  Tensor<T> log_probs(const Tensor<T>& h) const;

  /// Teacher-forced negative log-likelihood per example, summed over real
  /// target tokens (PAD masked out): [batch]. targets rows are BOS ... EOS.
  Tensor<T> nll(const Tensor<T>& reps, const SequenceBatch& targets) const;

  ParameterList<T> parameters(const std::string& prefix) const;
  Decoder clone() const;

 private:
  Decoder() = default;
  Decoder(const Decoder&) = default;
};

/// -sum_i log P(y_i | y_<i, rep) for one target sequence (BOS optional,
/// EOS required). Not length-normalised.
template <typename T>
Tensor<T> sequence_nll(const Decoder<T>& decoder, const Tensor<T>& rep, std::span<const int> target_ids);

/// Reshapes a [H] or [1, H] representation to [1, H], checking the width.
template <typename T>
Tensor<T> as_single_row(const Tensor<T>& rep, std::size_t hidden_dim, const char* op);

extern template struct GruCell<float>;
extern template struct GruCell<double>;
extern template struct SequenceEncoder<float>;
extern template struct SequenceEncoder<double>;
extern template struct VectorEncoder<float>;
extern template struct VectorEncoder<double>;
extern template class Encoder<float>;
extern template class Encoder<double>;
extern template struct Decoder<float>;
extern template struct Decoder<double>;

}  // namespace corrbridge
