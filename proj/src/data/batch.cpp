#include "corrbridge/data/batch.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace corrbridge {

bool SequenceBatch::step_full(std::size_t t) const {
  auto m = step_mask(t);
  return std::all_of(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; });
}

SequenceBatch pad_sequences(const std::vector<std::span<const int>>& sequences) {
  SequenceBatch batch;
  batch.batch_size = sequences.size();
  for (const auto& s : sequences) {
    if (s.empty()) throw DataError("pad_sequences: empty sequence");
    batch.max_len = std::max(batch.max_len, s.size());
    batch.lengths.push_back(s.size());
  }
  batch.ids.assign(batch.max_len * batch.batch_size, kPad);
  batch.mask.assign(batch.max_len * batch.batch_size, 0);
  for (std::size_t b = 0; b < sequences.size(); ++b) {
    for (std::size_t t = 0; t < sequences[b].size(); ++t) {
      batch.ids[t * batch.batch_size + b] = sequences[b][t];
      batch.mask[t * batch.batch_size + b] = 1;
    }
  }
  return batch;
}

namespace {

std::size_t source_length(const Example& ex) {
  return ex.source.empty() ? ex.target.size() : ex.source.size();
}

}  // namespace

Batch collate(std::span<const Example> corpus, std::vector<std::size_t> indices) {
  std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
    return source_length(corpus[a]) > source_length(corpus[b]);
  });
  Batch batch;
  batch.indices = std::move(indices);
  std::vector<std::span<const int>> sources, targets;
  for (auto i : batch.indices) {
    const auto& ex = corpus[i];
    if (!ex.source.empty()) sources.emplace_back(ex.source);
    if (!ex.target.empty()) targets.emplace_back(ex.target);
    if (!ex.features.empty()) {
      if (batch.feature_dim == 0) batch.feature_dim = ex.features.size();
      if (ex.features.size() != batch.feature_dim) throw DataError("collate: ragged feature vectors");
      batch.features.insert(batch.features.end(), ex.features.begin(), ex.features.end());
    }
  }
  if (!sources.empty()) {
    if (sources.size() != batch.indices.size()) throw DataError("collate: mixed sequence and vector sources");
    batch.source = pad_sequences(sources);
  }
  if (!targets.empty()) {
    if (targets.size() != batch.indices.size()) throw DataError("collate: some examples lack a target");
    batch.target = pad_sequences(targets);
  }
  return batch;
}

std::vector<Batch> make_batches(std::span<const Example> corpus, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw DataError("make_batches: batch_size must be >= 1");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  // Sort within pools of several batches so batches hold similar lengths.
  const std::size_t pool = batch_size * 8;
  for (std::size_t start = 0; start < order.size(); start += pool) {
    auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + pool));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return source_length(corpus[a]) > source_length(corpus[b]);
    });
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    std::vector<std::size_t> chunk(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch_size)));
    batches.push_back(collate(corpus, std::move(chunk)));
  }
  return batches;
}

SequenceBatch target_as_source(const Batch& batch) {
  std::vector<std::vector<int>> stripped;
  stripped.reserve(batch.size());
  for (std::size_t b = 0; b < batch.target.batch_size; ++b) {
    std::vector<int> ids;
    for (std::size_t t = 0; t < batch.target.lengths[b]; ++t) ids.push_back(batch.target.ids[t * batch.target.batch_size + b]);
    stripped.push_back(strip_markers(ids));
  }
  std::vector<std::span<const int>> views(stripped.begin(), stripped.end());
  return pad_sequences(views);
}

}  // namespace corrbridge
