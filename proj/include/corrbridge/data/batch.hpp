#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "corrbridge/data/corpus.hpp"

namespace corrbridge {

/// Padded id matrix stored time-major: ids[t * batch_size + b].
struct SequenceBatch {
  std::size_t batch_size = 0;
  std::size_t max_len = 0;
  std::vector<int> ids;
  std::vector<std::uint8_t> mask;
  std::vector<std::size_t> lengths;

  std::span<const int> step_ids(std::size_t t) const {
    return std::span<const int>(ids).subspan(t * batch_size, batch_size);
  }
  std::span<const std::uint8_t> step_mask(std::size_t t) const {
    return std::span<const std::uint8_t>(mask).subspan(t * batch_size, batch_size);
  }
  bool step_full(std::size_t t) const;
};

/// Pads sequences with kPad. Every sequence must be non-empty.
SequenceBatch pad_sequences(const std::vector<std::span<const int>>& sequences);

struct Batch {
  std::vector<std::size_t> indices;  // positions in the source corpus
  SequenceBatch source;              // empty for vector views
  std::vector<double> features;      // [batch, feature_dim] row-major, vector views
  std::size_t feature_dim = 0;
  SequenceBatch target;              // BOS ... EOS

  std::size_t size() const noexcept { return indices.size(); }
};

/// Builds a batch from the given examples, sorted by descending source length.
Batch collate(std::span<const Example> corpus, std::vector<std::size_t> indices);

/// Shuffles with `seed`, groups into length buckets, pads within each batch.
/// Every example appears in exactly one batch.
std::vector<Batch> make_batches(std::span<const Example> corpus, std::size_t batch_size, std::uint64_t seed);

/// Target ids of every example with BOS/EOS removed, padded as a source batch.
SequenceBatch target_as_source(const Batch& batch);

}  // namespace corrbridge
