#include "corrbridge/data/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace corrbridge {

std::string to_string(ViewKind kind) {
  return kind == ViewKind::Sequence ? "sequence" : "vector";
}

ViewKind parse_view_kind(std::string_view text) {
  if (text == "sequence") return ViewKind::Sequence;
  if (text == "vector") return ViewKind::Vector;
  throw DataError("unknown view type '" + std::string(text) + "' (expected sequence or vector)");
}

RawParallelFile parse_parallel_tsv(std::istream& in, TokenMode mode, const std::string& name) {
  RawParallelFile file;
  file.name = name;
  file.mode = mode;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tabs = std::count(line.begin(), line.end(), '\t');
    if (tabs != 1) {
      throw DataError(name + ":" + std::to_string(number) + ": expected exactly one TAB, found " +
                      std::to_string(tabs));
    }
    auto tab = line.find('\t');
    TextPair pair{line.substr(0, tab), line.substr(tab + 1), number};
    if (tokenize(pair.source, TokenMode::Whitespace).empty() || tokenize(pair.target, mode).empty()) {
      throw DataError(name + ":" + std::to_string(number) + ": empty source or target side");
    }
    file.pairs.push_back(std::move(pair));
  }
  if (file.pairs.empty()) throw DataError(name + ": no parallel pairs");
  return file;
}

RawParallelFile read_parallel_tsv(const std::string& path, TokenMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_parallel_tsv(in, mode, path);
}

void write_parallel_tsv(const std::string& path, const std::vector<TextPair>& pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& p : pairs) out << p.source << '\t' << p.target << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::vector<double> parse_features(const std::string& text, std::size_t line) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string field;
  while (in >> field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw DataError("line " + std::to_string(line) + ": feature '" + field + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw DataError("line " + std::to_string(line) + ": empty feature vector");
  return values;
}

void extend_vocab(Vocab& vocab, const RawParallelFile& file, bool source_side) {
  for (const auto& p : file.pairs) {
    for (const auto& t : tokenize(source_side ? p.source : p.target, file.mode)) vocab.add(t);
  }
}

ParallelCorpus index_corpus(const RawParallelFile& file, const Vocab& source_vocab, const Vocab& target_vocab,
                            ViewKind source_kind) {
  ParallelCorpus corpus;
  corpus.source_vocab = source_vocab;
  corpus.target_vocab = target_vocab;
  corpus.mode = file.mode;
  corpus.source_kind = source_kind;
  corpus.examples.reserve(file.pairs.size());
  for (const auto& p : file.pairs) {
    Example ex;
    if (source_kind == ViewKind::Sequence) {
      ex.source = source_vocab.encode(tokenize(p.source, file.mode));
    } else {
      ex.features = parse_features(p.source, p.line);
      if (corpus.feature_dim == 0) corpus.feature_dim = ex.features.size();
      if (ex.features.size() != corpus.feature_dim) {
        throw DataError(file.name + ":" + std::to_string(p.line) + ": feature vector has " +
                        std::to_string(ex.features.size()) + " values, expected " +
                        std::to_string(corpus.feature_dim));
      }
    }
    ex.target.push_back(kBos);
    for (int id : target_vocab.encode(tokenize(p.target, file.mode))) ex.target.push_back(id);
    ex.target.push_back(kEos);
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

ParallelCorpus load_parallel_tsv(const std::string& path, TokenMode mode, ViewKind source_kind) {
  auto file = read_parallel_tsv(path, mode);
  Vocab source, target;
  if (source_kind == ViewKind::Sequence) extend_vocab(source, file, true);
  extend_vocab(target, file, false);
  return index_corpus(file, source, target, source_kind);
}

std::vector<int> strip_markers(const std::vector<int>& ids) {
  auto begin = ids.begin();
  auto end = ids.end();
  if (begin != end && *begin == kBos) ++begin;
  if (begin != end && *(end - 1) == kEos) --end;
  return std::vector<int>(begin, end);
}

}  // namespace corrbridge
