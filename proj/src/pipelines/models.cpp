#include "corrbridge/pipelines/models.hpp"

namespace corrbridge {

namespace {

template <typename T>
Encoder<T> make_encoder(const ModelConfig& config, std::size_t vocab_size, ViewKind kind, Rng& rng) {
  if (kind == ViewKind::Vector) {
    if (config.feature_dim == 0) throw ConfigError("vector views need feature_dim > 0");
    return Encoder<T>(VectorEncoder<T>(config.feature_dim, config.hidden_dim, rng));
  }
  return Encoder<T>(SequenceEncoder<T>(vocab_size, config.embed_dim, config.hidden_dim, rng));
}

template <typename T>
void append(ParameterList<T>& out, ParameterList<T> more) {
  for (auto& p : more) out.push_back(std::move(p));
}

}  // namespace

template <typename T>
EncoderDecoder<T> EncoderDecoder<T>::create(const ModelConfig& config, Vocab source_vocab, Vocab target_vocab,
                                            TokenMode mode, ViewKind source_kind, Rng& rng) {
  config.validate();
  auto encoder = make_encoder<T>(config, source_vocab.size(), source_kind, rng);
  Decoder<T> decoder(target_vocab.size(), config.embed_dim, config.hidden_dim, rng);
  return EncoderDecoder{config, std::move(source_vocab), std::move(target_vocab), mode, std::move(encoder),
                        std::move(decoder)};
}

template <typename T>
ParameterList<T> EncoderDecoder<T>::parameters() const {
  auto out = encoder.parameters("encoder");
  append(out, decoder.parameters("decoder"));
  return out;
}

template <typename T>
EncoderDecoder<T> EncoderDecoder<T>::clone() const {
  return EncoderDecoder{config, source_vocab, target_vocab, mode, encoder.clone(), decoder.clone()};
}

template <typename T>
BridgeModel<T> BridgeModel<T>::create(const ModelConfig& config, Vocab x_vocab, Vocab z_vocab, Vocab y_vocab,
                                      TokenMode mode, ViewKind x_kind, Rng& rng) {
  config.validate();
  auto x_encoder = make_encoder<T>(config, x_vocab.size(), x_kind, rng);
  SequenceEncoder<T> z_encoder(z_vocab.size(), config.embed_dim, config.hidden_dim, rng);
  Decoder<T> y_decoder(y_vocab.size(), config.embed_dim, config.hidden_dim, rng);
  auto identity = StandardizationStats<T>::identity(config.hidden_dim);
  return BridgeModel{config,
                     std::move(x_vocab),
                     std::move(z_vocab),
                     std::move(y_vocab),
                     mode,
                     std::move(x_encoder),
                     std::move(z_encoder),
                     std::move(y_decoder),
                     identity,
                     identity,
                     false};
}

template <typename T>
ParameterList<T> BridgeModel<T>::parameters() const {
  auto out = x_parameters();
  append(out, z_parameters());
  append(out, y_parameters());
  return out;
}

template <typename T>
BridgeModel<T> BridgeModel<T>::clone() const {
  return BridgeModel{config,  x_vocab, z_vocab, y_vocab, mode, x_encoder.clone(), z_encoder.clone(),
                     y_decoder.clone(), x_stats, z_stats, standardize_at_inference};
}

template struct EncoderDecoder<float>;
template struct EncoderDecoder<double>;
template struct BridgeModel<float>;
template struct BridgeModel<double>;

}  // namespace corrbridge
