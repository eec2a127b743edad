#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "corrbridge/data/batch.hpp"
#include "corrbridge/data/corpus.hpp"
#include "corrbridge/data/join.hpp"
#include "corrbridge/data/synthetic.hpp"
#include "corrbridge/data/text.hpp"
#include "corrbridge/data/vocab.hpp"
#include "doctest.h"

using namespace corrbridge;

namespace {

std::vector<Example> toy_examples(std::size_t n) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    e.source.assign(1 + i % 4, static_cast<int>(4 + i));
    e.target = {kBos, static_cast<int>(4 + i), kEos};
    out.push_back(e);
  }
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("corrbridge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("char-mode TSV line splits into tokens with markers on the target") {
  std::istringstream in("abc\txyz\n");
  auto raw = parse_parallel_tsv(in, TokenMode::Char, "mem");
  REQUIRE(raw.pairs.size() == 1);
  Vocab src, tgt;
  extend_vocab(src, raw, true);
  extend_vocab(tgt, raw, false);
  auto corpus = index_corpus(raw, src, tgt);
  const auto& ex = corpus.examples.at(0);
  CHECK(src.decode(ex.source) == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(ex.target.size() == 5);
  CHECK(ex.target.front() == kBos);
  CHECK(ex.target.back() == kEos);
  CHECK(tgt.token(ex.target[1]) == "x");
  CHECK(tgt.token(ex.target[3]) == "z");
}

TEST_CASE("a line with two TABs is rejected by line number") {
  std::istringstream in("ab\tcd\nab\tc\td\n");
  try {
    (void)parse_parallel_tsv(in, TokenMode::Char, "pairs.tsv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("pairs.tsv:2") != std::string::npos);
  }
}

TEST_CASE("empty sides are rejected") {
  std::istringstream in("ab\t\n");
  CHECK_THROWS_AS((void)parse_parallel_tsv(in, TokenMode::Char, "x"), DataError);
}

TEST_CASE("a 19,918-line corpus loads completely") {
  auto dir = scratch_dir("large");
  auto path = (dir / "enhi.tsv").string();
  {
    std::ofstream out(path);
    for (int i = 0; i < 19918; ++i) out << "word" << i << "\t" << "\xE0\xA4\x95" << i % 97 << "\n";
  }
  auto corpus = load_parallel_tsv(path, TokenMode::Char);
  CHECK(corpus.size() == 19918);
  std::filesystem::remove_all(dir);
}

TEST_CASE("tokenize and detokenize round trip") {
  const std::string hindi = "\xE0\xA4\xA8\xE0\xA4\xAE\xE0\xA4\xB8\xE0\xA5\x8D\xE0\xA4\xA4\xE0\xA5\x87";
  for (auto mode : {TokenMode::Char, TokenMode::Whitespace}) {
    for (const std::string& s : {std::string("hello"), hindi, std::string("a b c")}) {
      if (mode == TokenMode::Char || s.find(' ') != std::string::npos) {
        auto toks = tokenize(s, mode);
        CHECK(detokenize(toks, mode) == s);
      }
    }
  }
  CHECK(tokenize(hindi, TokenMode::Char).size() == 6);
}

TEST_CASE("malformed UTF-8 is a data error") {
  CHECK_THROWS_AS((void)utf8_decode("\xC3"), DataError);
}

TEST_CASE("NFC composes decomposed sequences") {
  CHECK(nfc_normalize("e\xCC\x81") == "\xC3\xA9");
}

TEST_CASE("vocab reserves the special ids and maps unknowns to UNK") {
  Vocab v;
  CHECK(v.size() == 4);
  CHECK(v.add("q") == 4);
  CHECK(v.add("q") == 4);
  CHECK(v.id("nope") == kUnk);
  std::vector<int> ids{kBos, 4, kUnk, kEos, kPad};
  CHECK(v.decode(ids) == std::vector<std::string>{"q", v.token(kUnk)});
}

TEST_CASE("join emits the partner pairs of shared pivot keys") {
  std::vector<TextPair> a{{"e1", "h1", 1}}, b{{"e1", "k1", 1}};
  auto j = join_on_pivot(a, b);
  REQUIRE(j.pairs.size() == 1);
  CHECK(j.pairs[0].source == "h1");
  CHECK(j.pairs[0].target == "k1");
}

TEST_CASE("join without overlap is an error") {
  std::vector<TextPair> a{{"e1", "h1", 1}}, b{{"e2", "k1", 1}};
  CHECK_THROWS_AS((void)join_on_pivot(a, b), DataError);
}

TEST_CASE("repeated pivot keys join as a cross product in A order") {
  std::vector<TextPair> a{{"e1", "h1", 1}, {"e1", "h2", 2}, {"e9", "h9", 3}}, b{{"e1", "k1", 1}};
  auto j = join_on_pivot(a, b);
  REQUIRE(j.pairs.size() == 2);
  CHECK(j.pairs[0].source == "h1");
  CHECK(j.pairs[1].source == "h2");
  CHECK(j.pairs[1].target == "k1");
  CHECK(j.unmatched_a == 1);
  CHECK(j.unmatched_b == 0);
}

TEST_CASE("ten examples in batches of four give 4, 4, 2") {
  auto ex = toy_examples(10);
  auto batches = make_batches(ex, 4, 1);
  std::vector<std::size_t> sizes;
  for (const auto& b : batches) sizes.push_back(b.size());
  std::sort(sizes.rbegin(), sizes.rend());
  CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
}

TEST_CASE("batches partition the corpus") {
  auto ex = toy_examples(37);
  auto batches = make_batches(ex, 8, 42);
  std::vector<std::size_t> seen;
  for (const auto& b : batches) seen.insert(seen.end(), b.indices.begin(), b.indices.end());
  std::sort(seen.begin(), seen.end());
  std::vector<std::size_t> all(37);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  CHECK(seen == all);
}

TEST_CASE("same seed gives the same batches, another seed reshuffles") {
  auto ex = toy_examples(40);
  auto a = make_batches(ex, 8, 5), b = make_batches(ex, 8, 5), c = make_batches(ex, 8, 6);
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].indices == b[i].indices);
    CHECK(a[i].source.ids == b[i].source.ids);
    if (i < c.size() && a[i].indices != c[i].indices) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("batch masks mark real tokens and sources are length-sorted") {
  auto ex = toy_examples(9);
  for (const auto& b : make_batches(ex, 5, 3)) {
    for (std::size_t i = 1; i < b.source.lengths.size(); ++i) CHECK(b.source.lengths[i - 1] >= b.source.lengths[i]);
    for (std::size_t t = 0; t < b.source.max_len; ++t) {
      for (std::size_t r = 0; r < b.size(); ++r) {
        const bool real = t < b.source.lengths[r];
        CHECK(b.source.step_mask(t)[r] == (real ? 1 : 0));
        CHECK((b.source.step_ids(t)[r] == kPad) == !real);
      }
    }
  }
}

TEST_CASE("identity transforms give test pairs with x equal to y") {
  SyntheticSpec spec;
  spec.xz = Transform::parse("identity");
  spec.zy = Transform::parse("identity");
  spec.d1_size = spec.d2_size = 50;
  spec.test_size = 20;
  spec.d1_valid_size = spec.d2_valid_size = 5;
  auto data = gen_synthetic_pivot(spec);
  for (const auto& p : data.test) CHECK(p.source == p.target);
}

TEST_CASE("rot3 then reverse maps def to cba") {
  SyntheticSpec spec;
  CHECK(spec.xz.apply("abc", spec.alphabet_size) == "def");
  CHECK(synthetic_oracle(spec, "def") == "cba");
}

TEST_CASE("transforms invert") {
  for (const char* name : {"identity", "rot3", "reverse", "dup2"}) {
    auto t = Transform::parse(name);
    CHECK(t.name() == name);
    CHECK(t.invert(t.apply("abcdefg", 20), 20) == "abcdefg");
  }
  CHECK_THROWS((void)Transform::parse("rotate"));
}

TEST_CASE("synthetic splits have disjoint pivots and oracle-consistent tests") {
  SyntheticSpec spec;
  spec.d1_size = spec.d2_size = 400;
  spec.test_size = 100;
  spec.d1_valid_size = spec.d2_valid_size = 40;
  auto data = gen_synthetic_pivot(spec);
  CHECK(data.d1_train.size() == 400);
  CHECK(data.d2_train.size() == 400);
  CHECK(data.test.size() == 100);
  CHECK(data.d1_valid.size() == 40);
  CHECK(data.d2_valid.size() == 40);

  std::set<std::string> d1_pivots, d2_pivots, d1_x;
  for (const auto& p : data.d1_train) {
    d1_pivots.insert(p.target);
    d1_x.insert(p.source);
    CHECK(p.source == spec.xz.apply(p.target, spec.alphabet_size));
  }
  for (const auto& p : data.d2_train) {
    d2_pivots.insert(p.source);
    CHECK(p.target == spec.zy.apply(p.source, spec.alphabet_size));
    CHECK(d1_pivots.count(p.source) == 0);
  }
  for (const auto& p : data.test) {
    CHECK(p.target == synthetic_oracle(spec, p.source));
    CHECK(d1_x.count(p.source) == 0);
  }
}

TEST_CASE("synthetic generation is seed-deterministic") {
  SyntheticSpec spec;
  spec.d1_size = spec.d2_size = 30;
  spec.test_size = 10;
  auto a = gen_synthetic_pivot(spec), b = gen_synthetic_pivot(spec);
  for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].source == b.test[i].source);
}

TEST_CASE("impossible synthetic specs are rejected") {
  SyntheticSpec spec;
  spec.alphabet_size = 4;
  spec.min_len = spec.max_len = 1;
  CHECK_THROWS_AS(spec.validate(), DataError);
}
