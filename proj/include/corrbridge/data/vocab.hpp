#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace corrbridge {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kReservedTokens = 4;

/// Token <-> id bijection. Ids 0-3 are PAD, BOS, EOS, UNK; the rest follow
/// first-appearance order.
class Vocab {
 public:
  Vocab();

  static Vocab from_tokens(std::span<const std::string> ordered);

  int add(const std::string& token);
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  /// Unknown tokens map to kUnk.
  int id(const std::string& token) const;
  const std::string& token(int id) const;
  std::size_t size() const noexcept { return tokens_.size(); }

  std::vector<int> encode(std::span<const std::string> tokens) const;
  /// Drops PAD/BOS/EOS; UNK is rendered as its reserved token.
  std::vector<std::string> decode(std::span<const int> ids) const;

  /// Full ordered token list including the reserved entries.
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace corrbridge
