#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corrbridge/data/vocab.hpp"
#include "corrbridge/pipelines/models.hpp"
#include "corrbridge/seqmodel/modules.hpp"

namespace corrbridge::testing {

inline void fill(Tensor<double>& t, double value) {
  auto d = t.mutable_data();
  std::fill(d.begin(), d.end(), value);
}

inline void fill(Tensor<float>& t, float value) {
  auto d = t.mutable_data();
  std::fill(d.begin(), d.end(), value);
}

/// Row-stochastic transition table over a vocabulary: probs[prev][next].
using Transitions = std::vector<std::vector<double>>;

/// Uniform rows except where overridden.
inline Transitions uniform_transitions(std::size_t vocab) {
  return Transitions(vocab, std::vector<double>(vocab, 1.0 / static_cast<double>(vocab)));
}

/// Decoder whose next-token distribution depends only on the previous token:
/// one-hot embeddings, update gate saturated open, candidate = tanh(20 e_prev),
/// so the state is e_prev and the logits are the log-probability row.
template <typename T>
Decoder<T> markov_decoder(const Transitions& probs) {
  const std::size_t v = probs.size();
  Rng rng(7);
  Decoder<T> d(v, v, v, rng);
  fill(d.embedding, T(0));
  fill(d.cell.w_input, T(0));
  fill(d.cell.w_gates, T(0));
  fill(d.cell.w_candidate, T(0));
  fill(d.cell.bias, T(0));
  fill(d.b_out, T(0));
  auto emb = d.embedding.mutable_data();
  auto win = d.cell.w_input.mutable_data();
  auto bias = d.cell.bias.mutable_data();
  auto wout = d.w_out.mutable_data();
  for (std::size_t i = 0; i < v; ++i) {
    emb[i * v + i] = T(1);
    win[i * 3 * v + 2 * v + i] = T(20);
    bias[i] = T(50);
    for (std::size_t j = 0; j < v; ++j) {
      wout[i * v + j] = static_cast<T>(std::log(std::max(probs[i][j], 1e-300)));
    }
  }
  return d;
}

/// Vocab with the reserved ids followed by the given tokens.
inline Vocab vocab_of(const std::vector<std::string>& tokens) {
  Vocab v;
  for (const auto& t : tokens) v.add(t);
  return v;
}

/// Encoder-decoder that copies a single-token input: the encoder writes
/// e_t into the first half of the state, the decoder keeps that state on BOS
/// (update gate shut) and emits t, then moves to a state that emits EOS.
inline EncoderDecoder<float> copy_model(const Vocab& source, const Vocab& target) {
  const std::size_t v = std::max(source.size(), target.size());
  const std::size_t h = 2 * v;
  ModelConfig cfg;
  cfg.embed_dim = v;
  cfg.hidden_dim = h;
  cfg.allow_dim_mismatch = true;
  cfg.max_decode_len = 4;
  Rng rng(3);
  auto m = EncoderDecoder<float>::create(cfg, source, target, TokenMode::Char, ViewKind::Sequence, rng);

  auto& enc = m.encoder.sequence();
  fill(enc.embedding, 0.0f);
  fill(enc.cell.w_input, 0.0f);
  fill(enc.cell.w_gates, 0.0f);
  fill(enc.cell.w_candidate, 0.0f);
  fill(enc.cell.bias, 0.0f);
  {
    auto emb = enc.embedding.mutable_data();
    auto win = enc.cell.w_input.mutable_data();
    auto bias = enc.cell.bias.mutable_data();
    for (std::size_t i = 0; i < source.size(); ++i) {
      emb[i * v + i] = 1.0f;
      const int out = target.id(source.token(static_cast<int>(i)));
      if (i >= kReservedTokens) win[i * 3 * h + 2 * h + static_cast<std::size_t>(out)] = 20.0f;
    }
    for (std::size_t k = 0; k < h; ++k) bias[k] = 50.0f;
  }

  auto& dec = m.decoder;
  fill(dec.embedding, 0.0f);
  fill(dec.cell.w_input, 0.0f);
  fill(dec.cell.w_gates, 0.0f);
  fill(dec.cell.w_candidate, 0.0f);
  fill(dec.cell.bias, 0.0f);
  fill(dec.w_out, 0.0f);
  fill(dec.b_out, 0.0f);
  {
    auto emb = dec.embedding.mutable_data();
    auto win = dec.cell.w_input.mutable_data();
    auto bias = dec.cell.bias.mutable_data();
    auto wout = dec.w_out.mutable_data();
    const std::size_t tv = target.size();
    for (std::size_t i = 0; i < tv; ++i) emb[i * v + i] = 1.0f;
    for (std::size_t k = 0; k < h; ++k) bias[k] = -50.0f;
    for (std::size_t i = 0; i < tv; ++i) {
      if (static_cast<int>(i) == kBos) continue;
      for (std::size_t k = 0; k < h; ++k) win[i * 3 * h + k] = 100.0f;
      win[i * 3 * h + 2 * h + v] = 20.0f;
    }
    for (std::size_t i = kReservedTokens; i < tv; ++i) wout[i * tv + i] = 20.0f;
    wout[v * tv + kEos] = 20.0f;
  }
  return m;
}

}  // namespace corrbridge::testing
