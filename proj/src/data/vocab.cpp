#include "corrbridge/data/vocab.hpp"

#include "corrbridge/data/text.hpp"

namespace corrbridge {

Vocab::Vocab() {
  for (const char* reserved : {"<pad>", "<s>", "</s>", "<unk>"}) add(reserved);
}

Vocab Vocab::from_tokens(std::span<const std::string> ordered) {
  Vocab v;
  if (ordered.size() < static_cast<std::size_t>(kReservedTokens)) {
    throw DataError("vocabulary token list is missing the reserved entries");
  }
  for (int i = 0; i < kReservedTokens; ++i) {
    if (ordered[static_cast<std::size_t>(i)] != v.tokens_[static_cast<std::size_t>(i)]) {
      throw DataError("vocabulary reserved entry " + std::to_string(i) + " is '" +
                      ordered[static_cast<std::size_t>(i)] + "'");
    }
  }
  for (std::size_t i = kReservedTokens; i < ordered.size(); ++i) {
    if (v.contains(ordered[i])) throw DataError("duplicate vocabulary token '" + ordered[i] + "'");
    v.add(ordered[i]);
  }
  return v;
}

int Vocab::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " +
                    std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocab::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    out.push_back(token(id));
  }
  return out;
}

}  // namespace corrbridge
