// Copyright 2026 The deepskip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "deepskip/corpus.hpp"
#include "deepskip/eval.hpp"

using namespace deepskip;

namespace {

std::vector<Sentence> sents(std::initializer_list<std::vector<std::string>> toks) {
  std::vector<Sentence> out;
  for (const auto& t : toks) out.push_back({"", t});
  return out;
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("deepskip_" + name)).string();
}

}  // namespace

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(tokenize_line("THE CAT SAT") == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(tokenize_line("Don't stop") == std::vector<std::string>{"dont", "stop"});
  CHECK(tokenize_line("  ").empty());
  CHECK(tokenize_line("-- !! ok") == std::vector<std::string>{"ok"});
  std::istringstream in("u1\tHello World\n\nno id here\n");
  auto s = tokenize(in);
  REQUIRE(s.size() == 2);
  CHECK(s[0].utt_id == "u1");
  CHECK(s[0].tokens == std::vector<std::string>{"hello", "world"});
  CHECK(s[1].utt_id.empty());
  CHECK(s[1].tokens.size() == 3);
}

TEST_CASE("vocabulary honours min_count and tie-breaks lexicographically") {
  auto c = sents({{"a", "b", "a", "c"}});
  auto v2 = Vocabulary::build(c, 2);
  CHECK(v2.size() == 1);
  CHECK(v2.word(0) == "a");
  CHECK(v2.count(0) == 2);
  auto v1 = Vocabulary::build(c, 1);
  CHECK(v1.words() == std::vector<std::string>{"a", "b", "c"});
  CHECK(v1.total_count() == 4);
  CHECK_THROWS_AS(Vocabulary::build({}, 1), DataError);
  try {
    Vocabulary::build(c, 5);
  } catch (const DataError& e) {
    CHECK(e.tag() == "empty_vocabulary");
  }
}

TEST_CASE("vocabulary ids are a bijection and counts sum to retained tokens") {
  Rng rng = make_rng(3, "t");
  std::vector<Sentence> c;
  long kept = 0;
  for (int i = 0; i < 50; ++i) {
    Sentence s;
    for (int j = 0; j < 8; ++j) s.tokens.push_back(std::string(1, static_cast<char>('a' + uniform_index(rng, 12))));
    c.push_back(s);
  }
  auto v = Vocabulary::build(c, 20);
  for (const auto& s : c)
    for (const auto& t : s.tokens)
      if (v.id(t)) ++kept;
  CHECK(v.total_count() == kept);
  std::set<int> ids;
  for (int i = 0; i < v.size(); ++i) {
    CHECK(*v.id(v.word(i)) == i);
    CHECK(v.count(i) >= 20);
    ids.insert(i);
  }
  CHECK(static_cast<int>(ids.size()) == v.size());
  v.save(tmp("vocab.tsv"));
  auto back = Vocabulary::load(tmp("vocab.tsv"));
  CHECK(back.words() == v.words());
  CHECK(back.counts() == v.counts());
}

TEST_CASE("window examples") {
  auto c = sents({{"w1", "w2", "w3", "w4", "w5"}});
  auto v = Vocabulary::build(c, 1);
  auto samples = iter_windows(c[0], 2, v);
  std::set<std::string> ctx;
  for (auto s : samples)
    if (v.word(s.center) == "w3") ctx.insert(v.word(s.context));
  CHECK(ctx == std::set<std::string>{"w1", "w2", "w4", "w5"});
  auto one = sents({{"x"}});
  CHECK(iter_windows(one[0], 5, Vocabulary::build(one, 1)).empty());
  auto two = sents({{"p", "q"}});
  auto v2 = Vocabulary::build(two, 1);
  auto s2 = iter_windows(two[0], 5, v2);
  REQUIRE(s2.size() == 2);
  CHECK(v2.word(s2[0].center) == "p");
  CHECK(v2.word(s2[0].context) == "q");
  CHECK(v2.word(s2[1].center) == "q");
  CHECK(v2.word(s2[1].context) == "p");
}

TEST_CASE("out-of-vocabulary tokens keep their positions") {
  std::vector<int> ids{0, -1, 1};
  auto p = window_positions(ids, 1);
  CHECK(p.empty());
  auto q = window_positions(ids, 2);
  CHECK(q == std::vector<std::pair<int, int>>{{0, 2}, {2, 0}});
}

TEST_CASE("window counts match brute force and are symmetric") {
  Rng rng = make_rng(4, "t");
  for (int trial = 0; trial < 200; ++trial) {
    const int len = static_cast<int>(uniform_index(rng, 15));
    const int w = 1 + static_cast<int>(uniform_index(rng, 6));
    std::vector<int> ids(static_cast<std::size_t>(len));
    for (auto& x : ids) x = static_cast<int>(uniform_index(rng, 5));
    auto pairs = window_positions(ids, w);
    long expect = 0;
    for (int i = 0; i < len; ++i)
      for (int j = 0; j < len; ++j)
        if (i != j && std::abs(i - j) <= w) ++expect;
    CHECK(static_cast<long>(pairs.size()) == expect);
    std::multiset<std::pair<int, int>> fwd, rev;
    for (auto [i, j] : pairs) {
      fwd.insert({ids[i], ids[j]});
      rev.insert({ids[j], ids[i]});
      CHECK(std::abs(i - j) <= w);
      CHECK(i != j);
    }
    CHECK(fwd == rev);
  }
}

TEST_CASE("negative sampling") {
  auto single = sents({{"w", "w"}});
  auto v1 = Vocabulary::build(single, 1);
  Rng r0 = make_rng(1, "neg");
  CHECK(sample_negatives(v1, 3, r0) == std::vector<int>{0, 0, 0});

  auto ab = sents({{"a", "a", "a", "b"}});
  auto v = Vocabulary::build(ab, 1);
  Rng rng = make_rng(2, "neg");
  auto draws = sample_negatives(v, 100000, rng);
  const double pa = static_cast<double>(std::count(draws.begin(), draws.end(), *v.id("a"))) / draws.size();
  CHECK(std::abs(pa - 0.75) < 0.01);

  Rng x = make_rng(9, "neg"), y = make_rng(9, "neg");
  CHECK(sample_negatives(v, 50, x) == sample_negatives(v, 50, y));
}

TEST_CASE("negative sampling passes a chi-square goodness-of-fit test") {
  std::vector<std::int64_t> counts{40, 25, 12, 9, 6, 4, 2, 1, 1};
  NegativeSampler s(counts, 1.0);
  Rng rng = make_rng(5, "chi");
  const int n = 100000;
  std::vector<double> obs(counts.size(), 0.0);
  for (int i = 0; i < n; ++i) obs[s.draw(rng)] += 1.0;
  const double total = 100.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * counts[i] / total;
    CHECK(s.probability(static_cast<int>(i)) == doctest::Approx(counts[i] / total));
    chi2 += (obs[i] - e) * (obs[i] - e) / e;
  }
  // 8 degrees of freedom, 0.999 quantile.
  CHECK(chi2 < 26.12);
}

TEST_CASE("smoothing exponent changes the distribution") {
  std::vector<std::int64_t> counts{9, 1};
  NegativeSampler s(counts, 0.5);
  CHECK(s.probability(0) == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("eval pairs exhaust small vocabularies") {
  auto c = sents({{"a", "b", "c"}});
  auto v = Vocabulary::build(c, 1);
  MatrixXdR m(3, 2);
  m << 1, 0, 0, 1, 1, 1;
  WordVectors wv(v.words(), m);
  Rng rng = make_rng(1, "pairs");
  auto pairs = build_eval_pairs(v, wv, 3, rng);
  CHECK(pairs.size() == 3);
  Rng rng2 = make_rng(1, "pairs");
  CHECK(build_eval_pairs(v, wv, 10, rng2).size() == 3);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : pairs) {
    seen.insert(std::minmax(p.word_a, p.word_b));
    CHECK(p.target_cosine_distance >= 0.0);
    CHECK(p.target_cosine_distance <= 2.0);
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("eval pairs are unique, annotated and mix the three strategies") {
  Rng rng = make_rng(6, "t");
  std::vector<std::string> words;
  Sentence s;
  for (int i = 0; i < 60; ++i) {
    std::string w;
    for (int j = 0; j < 3 + static_cast<int>(uniform_index(rng, 4)); ++j) w += static_cast<char>('a' + uniform_index(rng, 6));
    if (std::find(words.begin(), words.end(), w) != words.end()) continue;
    words.push_back(w);
    s.tokens.push_back(w);
  }
  std::vector<Sentence> c{s};
  auto v = Vocabulary::build(c, 1);
  MatrixXdR m(v.size(), 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * uniform01(rng) - 1.0;
  WordVectors wv(v.words(), m);
  auto pairs = build_eval_pairs(v, wv, 300, rng);
  CHECK(pairs.size() == 300);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : pairs) {
    CHECK(p.word_a != p.word_b);
    CHECK(seen.insert(std::minmax(p.word_a, p.word_b)).second);
    CHECK(p.edit_distance == levenshtein(p.word_a, p.word_b));
    const double d = cosine_distance(wv.vector(*wv.find(p.word_a)), wv.vector(*wv.find(p.word_b)));
    CHECK(p.target_cosine_distance == doctest::Approx(d).epsilon(1e-12));
  }
  const auto path = tmp("pairs.tsv");
  save_eval_pairs(pairs, path);
  auto back = load_eval_pairs(path);
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(back[i].word_a == pairs[i].word_a);
    CHECK(back[i].target_cosine_distance == pairs[i].target_cosine_distance);
    CHECK(back[i].edit_distance == pairs[i].edit_distance);
  }
}

TEST_CASE("hail and hale are two edits apart") {
  auto c = sents({{"hail", "hale"}});
  auto v = Vocabulary::build(c, 1);
  MatrixXdR m(2, 2);
  m << 1, 0.5, 0.2, 1;
  Rng rng = make_rng(1, "t");
  auto pairs = build_eval_pairs(v, WordVectors(v.words(), m), 1, rng);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].edit_distance == 2);
}
