#include "corrbridge/data/synthetic.hpp"

#include <cmath>
#include <random>
#include <unordered_set>

namespace corrbridge {

namespace {

int letter_index(char c, int alphabet_size) {
  int idx = c - 'a';
  if (idx < 0 || idx >= alphabet_size) {
    throw DataError(std::string("character '") + c + "' is outside the synthetic alphabet");
  }
  return idx;
}

char letter(int idx) { return static_cast<char>('a' + idx); }

std::string rotate(const std::string& s, int shift, int alphabet_size) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    int idx = letter_index(c, alphabet_size);
    out.push_back(letter(((idx + shift) % alphabet_size + alphabet_size) % alphabet_size));
  }
  return out;
}

}  // namespace

Transform Transform::parse(std::string_view text) {
  auto number_after = [&](std::size_t prefix) {
    std::string digits(text.substr(prefix));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw DataError("invalid transform '" + std::string(text) + "'");
    }
    return std::stoi(digits);
  };
  if (text == "identity") return {Kind::Identity, 0};
  if (text == "reverse") return {Kind::Reverse, 0};
  if (text.starts_with("rot")) return {Kind::Rot, number_after(3)};
  if (text.starts_with("dup")) {
    int k = number_after(3);
    if (k < 1) throw DataError("duplicate-every-kth transform needs k >= 1");
    return {Kind::Duplicate, k};
  }
  throw DataError("unknown transform '" + std::string(text) + "' (identity, reverse, rotN, dupK)");
}

std::string Transform::name() const {
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Reverse: return "reverse";
    case Kind::Rot: return "rot" + std::to_string(param);
    case Kind::Duplicate: return "dup" + std::to_string(param);
  }
  return "identity";
}

std::string Transform::apply(const std::string& s, int alphabet_size) const {
  switch (kind) {
    case Kind::Identity:
      for (char c : s) letter_index(c, alphabet_size);
      return s;
    case Kind::Reverse:
      for (char c : s) letter_index(c, alphabet_size);
      return std::string(s.rbegin(), s.rend());
    case Kind::Rot:
      return rotate(s, param, alphabet_size);
    case Kind::Duplicate: {
      std::string out;
      for (std::size_t i = 0; i < s.size(); ++i) {
        letter_index(s[i], alphabet_size);
        out.push_back(s[i]);
        if ((i + 1) % static_cast<std::size_t>(param) == 0) out.push_back(s[i]);
      }
      return out;
    }
  }
  return s;
}

std::string Transform::invert(const std::string& s, int alphabet_size) const {
  switch (kind) {
    case Kind::Identity:
    case Kind::Reverse:
      return apply(s, alphabet_size);
    case Kind::Rot:
      return rotate(s, -param, alphabet_size);
    case Kind::Duplicate: {
      std::string out;
      std::size_t i = 0;
      while (i < s.size()) {
        letter_index(s[i], alphabet_size);
        out.push_back(s[i]);
        if (out.size() % static_cast<std::size_t>(param) == 0) {
          if (i + 1 >= s.size() || s[i + 1] != s[i]) {
            throw DataError("'" + s + "' is not in the image of " + name());
          }
          ++i;
        }
        ++i;
      }
      return out;
    }
  }
  return s;
}

void SyntheticSpec::validate() const {
  if (alphabet_size < 4 || alphabet_size > 26) throw DataError("synthetic alphabet size must be in [4, 26]");
  if (min_len < 1 || max_len < min_len) throw DataError("synthetic length range must satisfy 1 <= min <= max");
  if (d1_size == 0 || d2_size == 0 || test_size == 0) throw DataError("synthetic D1, D2 and test sizes must be >= 1");
  double capacity = 0.0;
  for (int len = min_len; len <= max_len; ++len) capacity += std::pow(static_cast<double>(alphabet_size), len);
  double requested = static_cast<double>(d1_size + d2_size + test_size + d1_valid_size + d2_valid_size);
  if (requested > capacity) {
    throw DataError("synthetic spec yields at most " + std::to_string(static_cast<long long>(capacity)) +
                    " unique strings but " + std::to_string(static_cast<long long>(requested)) + " were requested");
  }
}

SyntheticData gen_synthetic_pivot(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::unordered_set<std::string> used;
  const std::size_t span = static_cast<std::size_t>(spec.max_len - spec.min_len + 1);

  auto fresh_pivot = [&]() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      std::size_t len = static_cast<std::size_t>(spec.min_len) + rng() % span;
      std::string z;
      for (std::size_t i = 0; i < len; ++i) z.push_back(letter(static_cast<int>(rng() % static_cast<std::uint64_t>(spec.alphabet_size))));
      if (used.insert(z).second) return z;
    }
    throw DataError("synthetic spec produces fewer unique strings than requested");
  };

  const int a = spec.alphabet_size;
  SyntheticData data;
  auto fill_d1 = [&](std::vector<TextPair>& out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      auto z = fresh_pivot();
      out.push_back(TextPair{spec.xz.apply(z, a), z, i + 1});
    }
  };
  auto fill_d2 = [&](std::vector<TextPair>& out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      auto z = fresh_pivot();
      out.push_back(TextPair{z, spec.zy.apply(z, a), i + 1});
    }
  };
  fill_d1(data.d1_train, spec.d1_size);
  fill_d1(data.d1_valid, spec.d1_valid_size);
  fill_d2(data.d2_train, spec.d2_size);
  fill_d2(data.d2_valid, spec.d2_valid_size);
  for (std::size_t i = 0; i < spec.test_size; ++i) {
    auto z = fresh_pivot();
    auto x = spec.xz.apply(z, a);
    auto y = spec.zy.apply(z, a);
    if (synthetic_oracle(spec, x) != y) throw DataError("synthetic oracle disagrees with generated pair for '" + z + "'");
    data.test.push_back(TextPair{x, y, i + 1});
  }
  return data;
}

std::string synthetic_oracle(const SyntheticSpec& spec, const std::string& x) {
  return spec.zy.apply(spec.xz.invert(x, spec.alphabet_size), spec.alphabet_size);
}

}  // namespace corrbridge
