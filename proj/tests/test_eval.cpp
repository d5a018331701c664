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
#include <set>
#include <sstream>

#include "doctest.h"
#include "deepskip/eval.hpp"

using namespace deepskip;

namespace {

// Full (m+1) x (n+1) table.
int full_dp(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

std::string random_string(Rng& rng, int max_len, int alphabet) {
  std::string s;
  const int n = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(max_len + 1)));
  for (int i = 0; i < n; ++i) s += static_cast<char>('a' + uniform_index(rng, static_cast<std::size_t>(alphabet)));
  return s;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("cosine distance examples") {
  CHECK(cosine_distance(vec({1, 2}), vec({1, 2})) == doctest::Approx(0.0));
  CHECK(cosine_distance(vec({1, 0}), vec({0, 3})) == doctest::Approx(1.0));
  CHECK(cosine_distance(vec({1, -2}), vec({-1, 2})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(cosine_distance(vec({0, 0}), vec({1, 0})), NumericError);
}

TEST_CASE("levenshtein examples") {
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("hail", "hale") == 2);
  CHECK(levenshtein("kitten", "sitting") == 3);
}

TEST_CASE("levenshtein matches the full table on random pairs") {
  Rng rng = make_rng(1, "lev");
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_string(rng, 12, 4);
    const auto b = random_string(rng, 12, 4);
    REQUIRE(levenshtein(a, b) == full_dp(a, b));
  }
}

TEST_CASE("levenshtein is a metric with length bounds") {
  Rng rng = make_rng(2, "lev");
  for (int i = 0; i < 500; ++i) {
    const auto a = random_string(rng, 8, 3), b = random_string(rng, 8, 3), c = random_string(rng, 8, 3);
    const int ab = levenshtein(a, b);
    CHECK(ab == levenshtein(b, a));
    CHECK(levenshtein(a, a) == 0);
    CHECK((ab == 0) == (a == b));
    CHECK(levenshtein(a, c) <= ab + levenshtein(b, c));
    CHECK(ab >= std::abs(static_cast<int>(a.size()) - static_cast<int>(b.size())));
    CHECK(ab <= static_cast<int>(std::max(a.size(), b.size())));
  }
}

TEST_CASE("pearson hand cases") {
  std::vector<double> x{1, 2, 3}, y{2, 4, 6}, z{6, 4, 2};
  CHECK(std::abs(pearson(x, y) - 1.0) < 1e-12);
  CHECK(std::abs(pearson(x, z) + 1.0) < 1e-12);
  std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  CHECK(std::abs(pearson(a, b) - 0.8) < 1e-12);
  std::vector<double> flat{5, 5, 5};
  CHECK_THROWS_AS(pearson(x, flat), NumericError);
  std::vector<double> one{1};
  CHECK_THROWS_AS(pearson(one, one), DataError);
  CHECK_THROWS_AS(pearson(x, a), DataError);
}

TEST_CASE("pearson is invariant under positive affine maps") {
  Rng rng = make_rng(3, "p");
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(20), y(20), ax(20);
    const double s = 0.1 + 10.0 * uniform01(rng), off = 20.0 * uniform01(rng) - 10.0;
    for (int i = 0; i < 20; ++i) {
      x[i] = uniform01(rng);
      y[i] = x[i] + uniform01(rng);
      ax[i] = s * x[i] + off;
    }
    CHECK(std::abs(pearson(x, y) - pearson(ax, y)) < 1e-12);
  }
}

namespace {

struct Fixture {
  WordVectors base;
  std::vector<EvalPair> pairs;
};

Fixture random_fixture(int v, int d, int n_pairs, std::uint64_t seed) {
  Rng rng = make_rng(seed, "fix");
  std::vector<std::string> words;
  for (int i = 0; i < v; ++i) words.push_back("w" + std::to_string(i) + std::string(1 + i % 5, 'a'));
  MatrixXdR m(v, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * uniform01(rng) - 1.0;
  Fixture f{WordVectors(words, m), {}};
  std::set<std::pair<int, int>> used;
  while (static_cast<int>(f.pairs.size()) < n_pairs) {
    int a = static_cast<int>(uniform_index(rng, v)), b = static_cast<int>(uniform_index(rng, v));
    if (a == b || !used.insert(std::minmax(a, b)).second) continue;
    f.pairs.push_back({words[a], words[b], cosine_distance(f.base.vector(a), f.base.vector(b)),
                       levenshtein(words[a], words[b])});
  }
  return f;
}

}  // namespace

TEST_CASE("correlation report against the target itself is exactly one") {
  auto f = random_fixture(100, 10, 500, 1);
  auto r = correlation_report(f.base, f.pairs, 3);
  CHECK(r.r_cosine == 1.0);
  CHECK(r.epoch == 3);
  CHECK(r.n_pairs == 500);
  CHECK(r.n_excluded == 0);
}

TEST_CASE("random embeddings do not correlate with the target") {
  auto f = random_fixture(400, 100, 1000, 2);
  Rng rng = make_rng(7, "null");
  MatrixXdR m(400, 100);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * uniform01(rng) - 1.0;
  auto r = correlation_report(WordVectors(f.base.words(), m), f.pairs);
  CHECK(std::abs(r.r_cosine) < 0.1);
}

TEST_CASE("correlation report is rotation invariant") {
  auto f = random_fixture(80, 6, 300, 3);
  Rng rng = make_rng(8, "rot");
  Eigen::MatrixXd g(6, 6);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = uniform01(rng) - 0.5;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  MatrixXdR model(80, 6);
  for (Eigen::Index i = 0; i < model.size(); ++i) model.data()[i] = uniform01(rng) - 0.5;
  MatrixXdR rotated = model * q;
  auto a = correlation_report(WordVectors(f.base.words(), model), f.pairs);
  auto b = correlation_report(WordVectors(f.base.words(), rotated), f.pairs);
  CHECK(std::abs(a.r_cosine - b.r_cosine) < 1e-6);
  CHECK(std::abs(a.r_edit - b.r_edit) < 1e-6);
}

TEST_CASE("correlation report excludes pairs with missing or zero vectors") {
  auto f = random_fixture(20, 4, 40, 4);
  f.pairs.push_back({"nowhere", f.base.words()[0], 0.5, 3});
  MatrixXdR m = f.base.vectors();
  m.row(1).setZero();
  int touching = 0;
  for (const auto& p : f.pairs) touching += p.word_a == f.base.words()[1] || p.word_b == f.base.words()[1];
  auto r = correlation_report(WordVectors(f.base.words(), m), f.pairs);
  CHECK(r.n_excluded == 1 + touching);
  CHECK(r.n_pairs + r.n_excluded == static_cast<int>(f.pairs.size()));
  std::vector<EvalPair> few(f.pairs.begin(), f.pairs.begin() + 1);
  CHECK_THROWS_AS(correlation_report(f.base, few), DataError);
}

TEST_CASE("nearest neighbours") {
  MatrixXdR two(2, 2);
  two << 1, 0, 0, 1;
  auto t = nearest_neighbors("x", WordVectors({"x", "y"}, two), 5);
  REQUIRE(t.neighbors.size() == 1);
  CHECK(t.neighbors[0].word == "y");

  MatrixXdR m(5, 2);
  m << 1, 0, 0.9, 0.1, 0.2, 1, -1, 0, 0.9, 0.1;
  WordVectors wv({"q", "a", "b", "c", "d"}, m);
  auto n = nearest_neighbors("q", wv, 3);
  REQUIRE(n.neighbors.size() == 3);
  CHECK(n.neighbors[0].word == "a");
  CHECK(n.neighbors[1].word == "d");
  CHECK(n.neighbors[2].word == "b");
  for (std::size_t i = 1; i < n.neighbors.size(); ++i) CHECK(n.neighbors[i - 1].similarity >= n.neighbors[i].similarity);
  auto again = nearest_neighbors("q", wv, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.neighbors[i].word == n.neighbors[i].word);
  CHECK_THROWS_AS(nearest_neighbors("zzz", wv, 3), DataError);
  std::ostringstream text, recs;
  print_neighbor_table(text, n);
  print_neighbor_records(recs, n);
  const std::string rec = recs.str();
  CHECK(text.str().find("q") != std::string::npos);
  CHECK(std::count(rec.begin(), rec.end(), '\n') == 3);
}

TEST_CASE("slot corpus labels partition the vocabulary and are reproducible") {
  auto a = make_slot_corpus(2, 3, 500, 11);
  auto b = make_slot_corpus(2, 3, 500, 11);
  CHECK(a.words == b.words);
  CHECK(a.sentences.size() == 500);
  REQUIRE(a.words.size() == 6);
  CHECK(std::set<std::string>(a.words.begin(), a.words.end()).size() == 6);
  CHECK(std::count(a.labels.begin(), a.labels.end(), 0) == 3);
  CHECK(std::count(a.labels.begin(), a.labels.end(), 1) == 3);
  for (std::size_t i = 0; i < a.sentences.size(); ++i) CHECK(a.sentences[i].tokens == b.sentences[i].tokens);
  for (const auto& s : a.sentences) {
    std::set<int> cls;
    for (const auto& t : s.tokens) {
      auto it = std::find(a.words.begin(), a.words.end(), t);
      if (it != a.words.end()) cls.insert(a.labels[it - a.words.begin()]);
    }
    CHECK(cls.size() <= 1);
  }
}

TEST_CASE("class separation of ideal and mixed embeddings") {
  MatrixXdR m(4, 2);
  m << 1, 0, 1, 0.01, 0, 1, 0.01, 1;
  std::vector<std::string> w{"a", "b", "c", "d"};
  std::vector<int> lab{0, 0, 1, 1};
  CHECK(class_separation(WordVectors(w, m), w, lab) > 0.9);
  std::vector<int> mixed{0, 1, 0, 1};
  CHECK(class_separation(WordVectors(w, m), w, mixed) < 0.0);
}
