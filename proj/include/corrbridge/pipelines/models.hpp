#pragma once

#include "corrbridge/data/corpus.hpp"
#include "corrbridge/seqmodel/config.hpp"
#include "corrbridge/seqmodel/modules.hpp"
#include "corrbridge/training/standardize.hpp"

namespace corrbridge {

/// One encoder-decoder (a single stage of the two-stage pipeline).
template <typename T>
struct EncoderDecoder {
  ModelConfig config;
  Vocab source_vocab;
  Vocab target_vocab;
  TokenMode mode = TokenMode::Char;
  Encoder<T> encoder;
  Decoder<T> decoder;

  static EncoderDecoder create(const ModelConfig& config, Vocab source_vocab, Vocab target_vocab, TokenMode mode,
                               ViewKind source_kind, Rng& rng);

  ParameterList<T> parameters() const;
  EncoderDecoder clone() const;
};

/// X -> Z stage and Z -> Y stage, trained independently, chained at test time.
struct TwoStageModel {
  EncoderDecoder<float> stage1;
  EncoderDecoder<float> stage2;
};

/// Correlational encoder-decoder: encoders for X and Z whose standardized
/// representations are trained to correlate, and a Y decoder driven by the
/// Z encoder.
template <typename T>
struct BridgeModel {
  ModelConfig config;
  Vocab x_vocab;
  Vocab z_vocab;
  Vocab y_vocab;
  TokenMode mode = TokenMode::Char;
  Encoder<T> x_encoder;
  SequenceEncoder<T> z_encoder;
  Decoder<T> y_decoder;
  StandardizationStats<T> x_stats;
  StandardizationStats<T> z_stats;
  /// When set, inference maps h_X into Z's raw space through both sets of
  /// statistics: mean_z + sqrt(var_z) * s_x(h_X).
  bool standardize_at_inference = false;

  static BridgeModel create(const ModelConfig& config, Vocab x_vocab, Vocab z_vocab, Vocab y_vocab, TokenMode mode,
                            ViewKind x_kind, Rng& rng);

  ParameterList<T> x_parameters() const { return x_encoder.parameters("x_encoder"); }
  ParameterList<T> z_parameters() const { return z_encoder.parameters("z_encoder"); }
  ParameterList<T> y_parameters() const { return y_decoder.parameters("y_decoder"); }
  ParameterList<T> parameters() const;
  BridgeModel clone() const;
};

extern template struct EncoderDecoder<float>;
extern template struct EncoderDecoder<double>;
extern template struct BridgeModel<float>;
extern template struct BridgeModel<double>;

}  // namespace corrbridge
