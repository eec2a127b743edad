#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "corrbridge/data/text.hpp"
#include "corrbridge/data/vocab.hpp"

namespace corrbridge {

/// How the source column of a corpus is interpreted: token sequence, or a
/// whitespace-separated real feature vector (e.g. precomputed image features).
enum class ViewKind { Sequence, Vector };

std::string to_string(ViewKind kind);
ViewKind parse_view_kind(std::string_view text);

struct TextPair {
  std::string source;
  std::string target;
  std::size_t line = 0;
};

/// One TSV file, validated: exactly one TAB per line and no empty side.
struct RawParallelFile {
  std::string name;
  TokenMode mode = TokenMode::Char;
  std::vector<TextPair> pairs;
};

RawParallelFile read_parallel_tsv(const std::string& path, TokenMode mode);
RawParallelFile parse_parallel_tsv(std::istream& in, TokenMode mode, const std::string& name);
void write_parallel_tsv(const std::string& path, const std::vector<TextPair>& pairs);

struct Example {
  std::vector<int> source;         // sequence view: token ids, no markers
  std::vector<double> features;    // vector view
  std::vector<int> target;         // BOS ... EOS
};

/// Which views a corpus pairs, e.g. {'X','Z'} for D1. '?' when unknown.
struct ViewTags {
  char source = '?';
  char target = '?';

  std::string str() const { return std::string{source, '-', target}; }
  friend bool operator==(const ViewTags&, const ViewTags&) = default;
};

struct ParallelCorpus {
  std::vector<Example> examples;
  Vocab source_vocab;
  Vocab target_vocab;
  TokenMode mode = TokenMode::Char;
  ViewKind source_kind = ViewKind::Sequence;
  std::size_t feature_dim = 0;
  ViewTags views;

  std::size_t size() const noexcept { return examples.size(); }
};

/// Loads a TSV and builds both vocabularies from this file alone.
ParallelCorpus load_parallel_tsv(const std::string& path, TokenMode mode,
                                 ViewKind source_kind = ViewKind::Sequence);

/// Adds every token of one side of `file` to `vocab` in first-appearance order.
void extend_vocab(Vocab& vocab, const RawParallelFile& file, bool source_side);

/// Indexes a file against fixed vocabularies (unseen tokens become UNK).
ParallelCorpus index_corpus(const RawParallelFile& file, const Vocab& source_vocab, const Vocab& target_vocab,
                            ViewKind source_kind = ViewKind::Sequence);

std::vector<double> parse_features(const std::string& text, std::size_t line);

/// Strips a leading BOS and trailing EOS if present.
std::vector<int> strip_markers(const std::vector<int>& ids);

}  // namespace corrbridge
