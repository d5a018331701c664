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
#include <fstream>
#include <limits>

#include "doctest.h"
#include "deepskip/common.hpp"
#include "deepskip/discretize.hpp"

using namespace deepskip;

namespace {

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("deepskip_" + name)).string();
}

// Exhaustive optimum over all two-way partitions.
double best_two_partition(const MatrixXfR& x) {
  const int n = static_cast<int>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.cols());
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (static_cast<int>((mask >> i) & 1u) == side) {
          mean += x.row(i).cast<double>().transpose();
          ++count;
        }
      mean /= count;
      for (int i = 0; i < n; ++i)
        if (static_cast<int>((mask >> i) & 1u) == side) total += (x.row(i).cast<double>().transpose() - mean).squaredNorm();
    }
    best = std::min(best, total);
  }
  return best;
}

MatrixXfR column(std::initializer_list<float> v) {
  MatrixXfR m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (float x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("two well separated pairs") {
  KMeansConfig cfg;
  cfg.k = 2;
  auto r = kmeans_fit(column({0.0f, 0.1f, 10.0f, 10.1f}), cfg);
  std::vector<double> c = {r.codebook.centroids(0, 0), r.codebook.centroids(1, 0)};
  std::sort(c.begin(), c.end());
  CHECK(c[0] == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(c[1] == doctest::Approx(10.05).epsilon(1e-6));
  CHECK(r.codebook.inertia == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(r.assignment[0] == r.assignment[1]);
  CHECK(r.assignment[2] == r.assignment[3]);
  CHECK(r.assignment[0] != r.assignment[2]);
}

TEST_CASE("k-means matches the exhaustive two-cluster optimum") {
  Rng rng = make_rng(1, "km-oracle");
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + static_cast<int>(uniform_index(rng, 9));
    MatrixXfR x(n, 2);
    const double sep = 2.0 + 6.0 * uniform01(rng);
    for (int i = 0; i < n; ++i) {
      const double off = (i % 2) ? sep : 0.0;
      x(i, 0) = static_cast<float>(off + uniform01(rng));
      x(i, 1) = static_cast<float>(uniform01(rng));
    }
    KMeansConfig cfg;
    cfg.k = 2;
    cfg.n_init = 10;
    cfg.tol = 0.0;
    cfg.seed = static_cast<std::uint64_t>(trial);
    auto r = kmeans_fit(x, cfg);
    const double oracle = best_two_partition(x);
    CHECK(r.codebook.inertia >= oracle - 1e-6);
    CHECK(r.codebook.inertia == doctest::Approx(oracle).epsilon(1e-5));
  }
}

TEST_CASE("k equal to the number of distinct points gives zero inertia") {
  Rng rng = make_rng(2, "km-kn");
  MatrixXfR x(7, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(10.0 * uniform01(rng));
  KMeansConfig cfg;
  cfg.k = 7;
  auto r = kmeans_fit(x, cfg);
  CHECK(r.codebook.inertia == doctest::Approx(0.0));
  std::vector<int> sorted = r.assignment;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 7; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("inertia never increases across Lloyd steps") {
  Rng rng = make_rng(3, "km-mono");
  MatrixXfR x(600, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(uniform01(rng));
  KMeansConfig cfg;
  cfg.k = 12;
  cfg.tol = 0.0;
  cfg.max_iters = 50;
  auto r = kmeans_fit(x, cfg);
  REQUIRE(r.inertia_history.size() >= 2);
  for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
    CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] * (1.0 + 1e-9));
  CHECK(r.codebook.inertia <= r.inertia_history.front());
}

TEST_CASE("reassigning the fitting frames reproduces the converged labels") {
  Rng rng = make_rng(7, "km-idem");
  MatrixXfR x(500, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (int d = 0; d < 3; ++d) x(i, d) = static_cast<float>((i % 5) * 4.0 + uniform01(rng));
  KMeansConfig cfg;
  cfg.k = 5;
  cfg.max_iters = 200;
  auto r = kmeans_fit(x, cfg);
  CHECK(r.iterations < cfg.max_iters);
  CHECK(assign(x, r.codebook) == r.assignment);
}

TEST_CASE("k-means input validation and determinism") {
  KMeansConfig cfg;
  cfg.k = 5;
  CHECK_THROWS_AS(kmeans_fit(column({1.0f, 2.0f, 3.0f}), cfg), DataError);
  cfg.k = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.k = 3;
  cfg.n_init = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  Rng rng = make_rng(4, "km-det");
  MatrixXfR x(300, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(uniform01(rng));
  KMeansConfig c2;
  c2.k = 6;
  auto a = kmeans_fit(x, c2);
  auto b = kmeans_fit(x, c2);
  CHECK(a.codebook.centroids == b.codebook.centroids);
  CHECK(a.assignment == b.assignment);
}

TEST_CASE("assignment picks the nearest centroid, lowest id on ties") {
  Codebook cb;
  cb.centroids = column({2.0f, 0.0f, 5.0f});
  auto a = assign(column({1.0f, -3.0f, 4.0f, 3.5f, 2.1f}), cb);
  CHECK(a == std::vector<int>{0, 1, 2, 0, 0});
  CHECK(assign(cb.centroids, cb) == std::vector<int>{0, 1, 2});
  MatrixXfR wide = MatrixXfR::Zero(2, 2);
  CHECK_THROWS_AS(assign(wide, cb), DataError);
}

TEST_CASE("assignment matches a brute-force nearest search") {
  Rng rng = make_rng(5, "assign");
  Codebook cb;
  cb.centroids.resize(9, 5);
  for (Eigen::Index i = 0; i < cb.centroids.size(); ++i) cb.centroids.data()[i] = static_cast<float>(uniform01(rng));
  MatrixXfR x(400, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(uniform01(rng));
  auto a = assign(x, cb);
  for (int i = 0; i < 400; ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 9; ++k) {
      const double d = (x.row(i).cast<double>() - cb.centroids.row(k).cast<double>()).squaredNorm();
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    const double chosen = (x.row(i).cast<double>() - cb.centroids.row(a[i]).cast<double>()).squaredNorm();
    CHECK(chosen <= bd + 1e-6);
    if (a[i] != best) CHECK(chosen == doctest::Approx(bd));
  }
}

TEST_CASE("run deduplication") {
  CHECK(dedup_runs(std::vector<int>{}).empty());
  CHECK(dedup_runs(std::vector<int>{4}) == std::vector<int>{4});
  CHECK(dedup_runs(std::vector<int>{1, 1, 2, 2, 2, 1}) == std::vector<int>{1, 2, 1});
  CHECK(dedup_runs(std::vector<int>{3, 3, 3}) == std::vector<int>{3});

  Rng rng = make_rng(6, "dedup");
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<int> s(uniform_index(rng, 30));
    for (auto& v : s) v = static_cast<int>(uniform_index(rng, 4));
    auto d = dedup_runs(s);
    CHECK(dedup_runs(d) == d);
    for (std::size_t i = 1; i < d.size(); ++i) REQUIRE(d[i] != d[i - 1]);
    // expanding each kept id over its run restores the input
    std::vector<int> back;
    std::size_t j = 0;
    for (int v : d) {
      REQUIRE(j < s.size());
      REQUIRE(s[j] == v);
      while (j < s.size() && s[j] == v) back.push_back(s[j++]);
    }
    REQUIRE(back == s);
  }
}

TEST_CASE("codebook files") {
  Codebook cb;
  cb.centroids.resize(3, 4);
  for (Eigen::Index i = 0; i < cb.centroids.size(); ++i) cb.centroids.data()[i] = 0.5f * static_cast<float>(i) - 1.0f;
  cb.source = SourceTag::kW2v2;
  write_codebook(tmp("cb.kmb"), cb);
  Codebook r = read_codebook(tmp("cb.kmb"));
  CHECK(r.centroids == cb.centroids);
  CHECK(r.source == SourceTag::kW2v2);
  CHECK(std::filesystem::file_size(tmp("cb.kmb")) == 13 + 12 * 4);

  std::ifstream in(tmp("cb.kmb"), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  {
    std::ofstream f(tmp("cb_bad.kmb"), std::ios::binary);
    f << "KMB0" << bytes.substr(4);
  }
  CHECK_THROWS_WITH_AS(read_codebook(tmp("cb_bad.kmb")), doctest::Contains("not a KMB1"), DataError);
  {
    std::ofstream f(tmp("cb_short.kmb"), std::ios::binary);
    f << bytes.substr(0, bytes.size() - 1);
  }
  CHECK_THROWS_WITH_AS(read_codebook(tmp("cb_short.kmb")), doctest::Contains("truncated payload"), DataError);
}

TEST_CASE("encoding a corpus into unit sequences") {
  const auto dir = std::filesystem::temp_directory_path() / "deepskip_enc";
  std::filesystem::create_directories(dir / "features");
  // frame t carries value t / 10 so the nearest of centroids {0, 1} flips at t = 5
  FrameSequence fs;
  fs.frames.resize(20, 1);
  for (int t = 0; t < 20; ++t) fs.frames(t, 0) = static_cast<float>(t) / 10.0f;
  write_feature_file((dir / "features" / "u1.afv").string(), fs);
  std::vector<ManifestEntry> m(1);
  m[0] = {"u1", "wav/u1.wav", "features/u1.afv", {"u1", {{"one", 0.0, 0.08}, {"two", 0.03 + 0.05, 0.2}}}};
  const auto mpath = (dir / "manifest.jsonl").string();
  write_manifest(m, mpath);

  Codebook cb;
  cb.centroids = column({0.0f, 1.0f});
  UnitStore store = encode_corpus(m, mpath, cb);
  REQUIRE(store.records.size() == 2);
  CHECK(store.records[0].word == "one");
  CHECK(store.records[0].num_frames == 8);
  CHECK(store.records[0].units == std::vector<int>{0, 1});
  CHECK(store.records[1].word_index == 1);
  CHECK(store.records[1].num_frames == 12);
  CHECK(store.records[1].units == std::vector<int>{1});
  CHECK(store.stats.n_words == 2);
  CHECK(store.stats.mean_units_per_word == doctest::Approx(1.5));
  CHECK(store.stats.mean_frames_per_word == doctest::Approx(10.0));
  CHECK(store.stats.units_used == 2);
  CHECK(store.stats.mean_units_per_word < store.stats.mean_frames_per_word);

  save_unit_store(store.records, tmp("units.tsv"));
  auto back = load_unit_store(tmp("units.tsv"));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].utt_id == store.records[i].utt_id);
    CHECK(back[i].word == store.records[i].word);
    CHECK(back[i].word_index == store.records[i].word_index);
    CHECK(back[i].units == store.records[i].units);
  }

  m.push_back({"u2", "wav/u2.wav", "features/u2.afv", {"u2", {{"x", 0.0, 0.1}}}});
  CHECK_THROWS_WITH_AS(encode_corpus(m, mpath, cb), doctest::Contains("u2"), DataError);
}
