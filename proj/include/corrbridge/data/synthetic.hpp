#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrbridge/data/corpus.hpp"

namespace corrbridge {

/// Invertible string transform over the synthetic alphabet.
struct Transform {
  enum class Kind { Identity, Rot, Reverse, Duplicate };
  Kind kind = Kind::Identity;
  int param = 0;  // rotation amount, or k for duplicate-every-kth

  static Transform parse(std::string_view text);  // identity, rot3, reverse, dup2
  std::string name() const;

  std::string apply(const std::string& s, int alphabet_size) const;
  std::string invert(const std::string& s, int alphabet_size) const;
};

struct SyntheticSpec {
  int alphabet_size = 20;
  int min_len = 4;
  int max_len = 8;
  Transform xz{Transform::Kind::Rot, 3};
  Transform zy{Transform::Kind::Reverse, 0};
  std::size_t d1_size = 3000;
  std::size_t d2_size = 3000;
  std::size_t test_size = 500;
  std::size_t d1_valid_size = 300;
  std::size_t d2_valid_size = 300;
  std::uint64_t seed = 1;

  void validate() const;
};

/// D1 = (x, z) with x = xz(z); D2 = (z, y) with y = zy(z) on pivots disjoint
/// from D1; test = (x, zy(xz^-1(x))) on pivots unseen in either.
struct SyntheticData {
  std::vector<TextPair> d1_train;
  std::vector<TextPair> d1_valid;
  std::vector<TextPair> d2_train;
  std::vector<TextPair> d2_valid;
  std::vector<TextPair> test;
};

SyntheticData gen_synthetic_pivot(const SyntheticSpec& spec);

/// Ground-truth X -> Y mapping: zy(xz^-1(x)).
std::string synthetic_oracle(const SyntheticSpec& spec, const std::string& x);

}  // namespace corrbridge
