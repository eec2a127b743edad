#pragma once

#include <filesystem>
#include <string>

#include "corrbridge/data/synthetic.hpp"
#include "corrbridge/pipelines/pipelines.hpp"

namespace corrbridge::testing {

inline RawParallelFile raw_file(std::string name, std::vector<TextPair> pairs) {
  RawParallelFile f;
  f.name = std::move(name);
  f.mode = TokenMode::Char;
  f.pairs = std::move(pairs);
  return f;
}

/// A small rot3/reverse pivot task.
inline PivotFiles small_pivot_files(std::size_t d1, std::size_t d2, std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.alphabet_size = 8;
  spec.min_len = 3;
  spec.max_len = 5;
  spec.d1_size = d1;
  spec.d2_size = d2;
  spec.d1_valid_size = 10;
  spec.d2_valid_size = 10;
  spec.test_size = 10;
  spec.seed = seed;
  auto data = gen_synthetic_pivot(spec);
  PivotFiles files;
  files.d1_train = raw_file("d1_train", data.d1_train);
  files.d1_valid = raw_file("d1_valid", data.d1_valid);
  files.d2_train = raw_file("d2_train", data.d2_train);
  files.d2_valid = raw_file("d2_valid", data.d2_valid);
  return files;
}

inline ModelConfig small_model(std::size_t hidden = 16) {
  ModelConfig cfg;
  cfg.embed_dim = hidden;
  cfg.hidden_dim = hidden;
  cfg.max_decode_len = 12;
  return cfg;
}

inline BridgeModel<float> small_bridge(const BridgeCorpora& c, std::uint64_t seed = 3, std::size_t hidden = 16) {
  Rng rng(seed);
  return BridgeModel<float>::create(small_model(hidden), c.x_vocab, c.z_vocab, c.y_vocab, c.mode, c.x_kind, rng);
}

inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("corrbridge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace corrbridge::testing
