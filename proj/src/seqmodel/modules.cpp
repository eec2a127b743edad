#include "corrbridge/seqmodel/modules.hpp"

#include "corrbridge/numerics/ops.hpp"
#include "corrbridge/numerics/tape.hpp"

namespace corrbridge {

template <typename T>
Tensor<T> as_single_row(const Tensor<T>& rep, std::size_t hidden_dim, const char* op) {
  if (rep.size() != hidden_dim || rep.rank() > 2 || (rep.rank() == 2 && rep.dim(0) != 1)) {
    throw ShapeError(op, rep.shape(), Shape{hidden_dim});
  }
  if (rep.rank() == 2) return rep;
  return reshape(rep, Shape{1, hidden_dim});
}

// GruCell

template <typename T>
GruCell<T> GruCell<T>::create(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  GruCell cell;
  cell.w_input = make_weight<T>(Shape{input_dim, 3 * hidden_dim}, rng);
  cell.w_gates = make_weight<T>(Shape{hidden_dim, 2 * hidden_dim}, rng);
  cell.w_candidate = make_weight<T>(Shape{hidden_dim, hidden_dim}, rng);
  cell.bias = make_bias<T>(3 * hidden_dim);
  return cell;
}

template <typename T>
Tensor<T> GruCell<T>::step(const Tensor<T>& x, const Tensor<T>& h) const {
  const std::size_t hd = hidden_dim();
  if (h.rank() != 2 || h.dim(1) != hd) throw ShapeError("gru_step", h.shape(), Shape{h.rank() ? h.dim(0) : 0, hd});
  auto projected = add_row(matmul(x, w_input), bias);
  auto gates = sigmoid(slice_cols(projected, 0, 2 * hd) + matmul(h, w_gates));
  auto update = slice_cols(gates, 0, hd);
  auto reset = slice_cols(gates, hd, 2 * hd);
  auto candidate = tanh(slice_cols(projected, 2 * hd, 3 * hd) + matmul(reset * h, w_candidate));
  return h + update * (candidate - h);
}

template <typename T>
void GruCell<T>::collect(const std::string& prefix, ParameterList<T>& out) const {
  out.push_back({prefix + ".w_input", w_input});
  out.push_back({prefix + ".w_gates", w_gates});
  out.push_back({prefix + ".w_candidate", w_candidate});
  out.push_back({prefix + ".bias", bias});
}

template <typename T>
GruCell<T> GruCell<T>::clone() const {
  return GruCell{w_input.clone(), w_gates.clone(), w_candidate.clone(), bias.clone()};
}

// SequenceEncoder

template <typename T>
SequenceEncoder<T>::SequenceEncoder(std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden_dim, Rng& rng)
    : embedding(make_weight<T>(Shape{vocab_size, embed_dim}, rng)),
      cell(GruCell<T>::create(embed_dim, hidden_dim, rng)) {}

template <typename T>
Tensor<T> SequenceEncoder<T>::encode(std::span<const int> ids) const {
  if (ids.empty()) throw ShapeError("encode_sequence", "empty id sequence");
  auto batch = pad_sequences({ids});
  return reshape(encode_batch(batch), Shape{hidden_dim()});
}

template <typename T>
Tensor<T> SequenceEncoder<T>::encode_batch(const SequenceBatch& batch) const {
  if (batch.batch_size == 0 || batch.max_len == 0) throw ShapeError("encode_sequence", "empty batch");
  calls.bump();
  const std::size_t hd = hidden_dim();
  auto h = Tensor<T>::zeros(Shape{batch.batch_size, hd});
  for (std::size_t t = 0; t < batch.max_len; ++t) {
    auto next = cell.step(gather_rows(embedding, batch.step_ids(t)), h);
    if (batch.step_full(t)) {
      h = next;
      continue;
    }
    std::vector<T> keep(batch.batch_size * hd);
    auto m = batch.step_mask(t);
    for (std::size_t b = 0; b < batch.batch_size; ++b) {
      std::fill_n(keep.begin() + static_cast<std::ptrdiff_t>(b * hd), hd, m[b] ? T(1) : T(0));
    }
    auto mask = Tensor<T>(Shape{batch.batch_size, hd}, std::move(keep));
    h = h + mask * (next - h);
  }
  return h;
}

template <typename T>
ParameterList<T> SequenceEncoder<T>::parameters(const std::string& prefix) const {
  ParameterList<T> out{{prefix + ".embedding", embedding}};
  cell.collect(prefix + ".gru", out);
  return out;
}

template <typename T>
SequenceEncoder<T> SequenceEncoder<T>::clone() const {
  SequenceEncoder copy(*this);
  copy.embedding = embedding.clone();
  copy.cell = cell.clone();
  copy.calls.reset();
  return copy;
}

// VectorEncoder

template <typename T>
VectorEncoder<T>::VectorEncoder(std::size_t feature_dim, std::size_t hidden_dim, Rng& rng)
    : weight(make_weight<T>(Shape{feature_dim, hidden_dim}, rng)), bias(make_bias<T>(hidden_dim)) {}

template <typename T>
Tensor<T> VectorEncoder<T>::encode(std::span<const double> features) const {
  return reshape(encode_batch(features, 1), Shape{hidden_dim()});
}

template <typename T>
Tensor<T> VectorEncoder<T>::encode_batch(std::span<const double> features, std::size_t rows) const {
  if (rows == 0 || features.size() != rows * feature_dim()) {
    throw ShapeError("encode_vector", Shape{features.size()}, Shape{rows, feature_dim()});
  }
  calls.bump();
  std::vector<T> values(features.begin(), features.end());
  auto x = Tensor<T>(Shape{rows, feature_dim()}, std::move(values));
  return tanh(add_row(matmul(x, weight), bias));
}

template <typename T>
ParameterList<T> VectorEncoder<T>::parameters(const std::string& prefix) const {
  return {{prefix + ".weight", weight}, {prefix + ".bias", bias}};
}

template <typename T>
VectorEncoder<T> VectorEncoder<T>::clone() const {
  VectorEncoder copy(*this);
  copy.weight = weight.clone();
  copy.bias = bias.clone();
  copy.calls.reset();
  return copy;
}

// Encoder

template <typename T>
std::size_t Encoder<T>::hidden_dim() const {
  return std::visit([](const auto& e) { return e.hidden_dim(); }, impl_);
}

template <typename T>
Tensor<T> Encoder<T>::encode(const Example& example) const {
  if (kind() == ViewKind::Sequence) return sequence().encode(example.source);
  return vector().encode(example.features);
}

template <typename T>
Tensor<T> Encoder<T>::encode_batch(const Batch& batch) const {
  if (kind() == ViewKind::Sequence) return sequence().encode_batch(batch.source);
  return vector().encode_batch(batch.features, batch.size());
}

template <typename T>
ParameterList<T> Encoder<T>::parameters(const std::string& prefix) const {
  return std::visit([&](const auto& e) { return e.parameters(prefix); }, impl_);
}

template <typename T>
Encoder<T> Encoder<T>::clone() const {
  return std::visit([](const auto& e) { return Encoder(e.clone()); }, impl_);
}

template <typename T>
const InvocationCounter& Encoder<T>::calls() const {
  return std::visit([](const auto& e) -> const InvocationCounter& { return e.calls; }, impl_);
}

// Decoder

template <typename T>
Decoder<T>::Decoder(std::size_t vocab_size, std::size_t embed_dim, std::size_t hidden_dim, Rng& rng)
    : embedding(make_weight<T>(Shape{vocab_size, embed_dim}, rng)),
      cell(GruCell<T>::create(embed_dim, hidden_dim, rng)),
      w_out(make_weight<T>(Shape{hidden_dim, vocab_size}, rng)),
      b_out(make_bias<T>(vocab_size)) {}

template <typename T>
Tensor<T> Decoder<T>::step(const Tensor<T>& h, std::span<const int> previous) const {
  return cell.step(gather_rows(embedding, previous), h);
}

template <typename T>
Tensor<T> Decoder<T>::log_probs(const Tensor<T>& h) const {
  return log_softmax(add_row(matmul(h, w_out), b_out));
}

template <typename T>
Tensor<T> Decoder<T>::nll(const Tensor<T>& reps, const SequenceBatch& targets) const {
  if (reps.rank() != 2 || reps.dim(1) != hidden_dim() || reps.dim(0) != targets.batch_size) {
    throw ShapeError("sequence_nll", reps.shape(), Shape{targets.batch_size, hidden_dim()});
  }
  if (targets.max_len < 2) throw ShapeError("sequence_nll", "target must hold BOS and at least one token");
  calls.bump();
  Tensor<T> h = reps;
  Tensor<T> total;
  for (std::size_t t = 1; t < targets.max_len; ++t) {
    h = step(h, targets.step_ids(t - 1));
    auto picked = pick(log_probs(h), targets.step_ids(t));
    if (!targets.step_full(t)) {
      auto m = targets.step_mask(t);
      std::vector<T> keep(m.begin(), m.end());
      picked = picked * Tensor<T>(Shape{targets.batch_size}, std::move(keep));
    }
    total = total.defined() ? total + picked : picked;
  }
  return scale(total, T(-1));
}

template <typename T>
ParameterList<T> Decoder<T>::parameters(const std::string& prefix) const {
  ParameterList<T> out{{prefix + ".embedding", embedding}};
  cell.collect(prefix + ".gru", out);
  out.push_back({prefix + ".w_out", w_out});
  out.push_back({prefix + ".b_out", b_out});
  return out;
}

template <typename T>
Decoder<T> Decoder<T>::clone() const {
  Decoder copy(*this);
  copy.embedding = embedding.clone();
  copy.cell = cell.clone();
  copy.w_out = w_out.clone();
  copy.b_out = b_out.clone();
  copy.calls.reset();
  return copy;
}

template <typename T>
Tensor<T> sequence_nll(const Decoder<T>& decoder, const Tensor<T>& rep, std::span<const int> target_ids) {
  if (target_ids.empty()) throw ShapeError("sequence_nll", "empty target");
  if (target_ids.back() != kEos) throw ShapeError("sequence_nll", "target must end with EOS");
  std::vector<int> wrapped;
  if (target_ids.front() != kBos) wrapped.push_back(kBos);
  wrapped.insert(wrapped.end(), target_ids.begin(), target_ids.end());
  if (wrapped.size() < 2) throw ShapeError("sequence_nll", "target must hold at least one scored token");
  auto batch = pad_sequences({std::span<const int>(wrapped)});
  return sum(decoder.nll(as_single_row(rep, decoder.hidden_dim(), "sequence_nll"), batch));
}

template struct GruCell<float>;
template struct GruCell<double>;
template struct SequenceEncoder<float>;
template struct SequenceEncoder<double>;
template struct VectorEncoder<float>;
template struct VectorEncoder<double>;
template class Encoder<float>;
template class Encoder<double>;
template struct Decoder<float>;
template struct Decoder<double>;
template Tensor<float> sequence_nll(const Decoder<float>&, const Tensor<float>&, std::span<const int>);
template Tensor<double> sequence_nll(const Decoder<double>&, const Tensor<double>&, std::span<const int>);
template Tensor<float> as_single_row(const Tensor<float>&, std::size_t, const char*);
template Tensor<double> as_single_row(const Tensor<double>&, std::size_t, const char*);

}  // namespace corrbridge
