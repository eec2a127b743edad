#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corrbridge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CellType { Gru };

struct ModelConfig {
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  CellType cell = CellType::Gru;
  std::size_t max_decode_len = 16;
  std::size_t beam_width = 1;  // 1 = greedy
  std::size_t feature_dim = 0;  // vector-view encoders only
  bool allow_dim_mismatch = false;

  /// embed_dim must equal hidden_dim unless allow_dim_mismatch is set.
  void validate() const;
};

/// Twice the longest training source, never below 16.
std::size_t default_max_decode_len(std::size_t longest_source);

}  // namespace corrbridge
