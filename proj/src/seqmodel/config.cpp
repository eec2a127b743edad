#include "corrbridge/seqmodel/config.hpp"

#include <algorithm>

namespace corrbridge {

void ModelConfig::validate() const {
  if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("embed_dim and hidden_dim must be positive");
  if (embed_dim != hidden_dim && !allow_dim_mismatch) {
    throw ConfigError("embed_dim (" + std::to_string(embed_dim) + ") must equal hidden_dim (" +
                      std::to_string(hidden_dim) + "); set allow_dim_mismatch to override");
  }
  if (max_decode_len < 1) throw ConfigError("max_decode_len must be >= 1");
  if (beam_width < 1) throw ConfigError("beam_width must be >= 1");
}

std::size_t default_max_decode_len(std::size_t longest_source) {
  return std::max<std::size_t>(2 * longest_source, 16);
}

}  // namespace corrbridge
