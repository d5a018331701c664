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

#include "deepskip/discretize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "deepskip/common.hpp"
#include "deepskip/log.hpp"

namespace deepskip {
namespace {

using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

// Nearest centroid with strict comparison, so ties keep the lowest id.
inline std::pair<int, double> nearest(const double* x, const MatD& c) {
  const int d = static_cast<int>(c.cols());
  int best = 0;
  double best_d = sq_dist(x, c.data(), d);
  for (Eigen::Index j = 1; j < c.rows(); ++j) {
    const double dj = sq_dist(x, c.data() + j * d, d);
    if (dj < best_d) {
      best_d = dj;
      best = static_cast<int>(j);
    }
  }
  return {best, best_d};
}

double assign_all(const MatD& x, const MatD& c, std::vector<int>& labels, std::vector<double>& dists) {
  labels.resize(static_cast<std::size_t>(x.rows()));
  dists.resize(static_cast<std::size_t>(x.rows()));
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto [j, d] = nearest(x.data() + i * x.cols(), c);
    labels[i] = j;
    dists[i] = d;
    inertia += d;
  }
  return inertia;
}

MatD kmeanspp_init(const MatD& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  const int d = static_cast<int>(x.cols());
  MatD c(k, d);
  std::vector<double> closest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  auto first = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
  c.row(0) = x.row(first);
  taken[first] = 1;
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], sq_dist(x.data() + i * d, c.data() + (j - 1) * d, d));
      total += closest[i];
    }
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double r = uniform01(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= closest[i];
        if (r < 0.0 && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (closest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a chosen centre; take any unused point.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!taken[i]) free.push_back(i);
      pick = free[uniform_index(rng, free.size())];
    }
    c.row(j) = x.row(pick);
    taken[pick] = 1;
  }
  return c;
}

struct LloydRun {
  MatD centroids;
  std::vector<double> history;
  int iterations = 0;
  double inertia = 0.0;
};

LloydRun lloyd(const MatD& x, const KMeansConfig& cfg, Rng& rng) {
  LloydRun run;
  run.centroids = kmeanspp_init(x, cfg.k, rng);
  const int d = static_cast<int>(x.cols());
  std::vector<int> labels;
  std::vector<double> dists;
  std::vector<long> counts(static_cast<std::size_t>(cfg.k));
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double inertia = assign_all(x, run.centroids, labels, dists);
    run.history.push_back(inertia);
    run.iterations = it + 1;
    run.inertia = inertia;
    if (inertia == 0.0) break;
    if (it > 0) {
      const double prev = run.history[run.history.size() - 2];
      if ((prev - inertia) / prev < cfg.tol) break;
    }
    // Centroid update with a fixed (row-order) reduction.
    MatD sums = MatD::Zero(cfg.k, d);
    std::fill(counts.begin(), counts.end(), 0L);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sums.row(labels[i]) += x.row(i);
      ++counts[labels[i]];
    }
    std::vector<int> empty;
    for (int j = 0; j < cfg.k; ++j) {
      if (counts[j] > 0) {
        run.centroids.row(j) = sums.row(j) / static_cast<double>(counts[j]);
      } else {
        empty.push_back(j);
      }
    }
    if (!empty.empty()) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        dists[i] = sq_dist(x.data() + i * d, run.centroids.data() + labels[i] * d, d);
      }
      for (int j : empty) {
        auto far = static_cast<Eigen::Index>(std::max_element(dists.begin(), dists.end()) - dists.begin());
        run.centroids.row(j) = x.row(far);
        dists[far] = 0.0;
        log().debug("k-means: cluster {} empty, moved to frame {}", j, far);
      }
    }
  }
  return run;
}

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

}  // namespace

void KMeansConfig::validate() const {
  if (k < 2) throw ConfigError("k", "K must be >= 2");
  if (max_iters < 1) throw ConfigError("max_iters", "max_iters must be >= 1");
  if (!(tol >= 0.0)) throw ConfigError("tol", "tol must be >= 0");
  if (n_init < 1) throw ConfigError("n_init", "n_init must be >= 1");
}

KMeansResult kmeans_fit(const MatrixXfR& frames, const KMeansConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = frames.rows();
  if (n < cfg.k) {
    throw DataError("too_few_frames", "k-means needs at least K=" + std::to_string(cfg.k) + " frames, got " +
                                          std::to_string(n));
  }
  MatD x;
  if (cfg.max_frames > 0 && n > cfg.max_frames) {
    auto rng = make_rng(cfg.seed, "kmeans-subsample");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (long i = 0; i < cfg.max_frames; ++i) {
      std::swap(idx[i], idx[i + uniform_index(rng, static_cast<std::size_t>(n - i))]);
    }
    idx.resize(static_cast<std::size_t>(cfg.max_frames));
    std::sort(idx.begin(), idx.end());
    x.resize(cfg.max_frames, frames.cols());
    for (long i = 0; i < cfg.max_frames; ++i) x.row(i) = frames.row(idx[i]).cast<double>();
    log().info("k-means: fitting on {} of {} frames", cfg.max_frames, n);
  } else {
    x = frames.cast<double>();
  }

  LloydRun best;
  bool have = false;
  for (int r = 0; r < cfg.n_init; ++r) {
    auto rng = make_rng(cfg.seed, "kmeans-init-" + std::to_string(r));
    LloydRun run = lloyd(x, cfg, rng);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }

  KMeansResult res;
  res.codebook.centroids = best.centroids.cast<float>();
  res.inertia_history = best.history;
  res.iterations = best.iterations;
  // Final labels and inertia against the stored (f32) centroids.
  const MatD c = res.codebook.centroids.cast<double>();
  const MatD full = frames.cast<double>();
  std::vector<double> dists;
  res.codebook.inertia = assign_all(full, c, res.assignment, dists);
  return res;
}

std::vector<int> assign(const MatrixXfR& frames, const Codebook& cb) {
  if (frames.cols() != cb.centroids.cols()) {
    throw DataError("dimension_mismatch", "frames have dimension " + std::to_string(frames.cols()) +
                                              " but the codebook has " + std::to_string(cb.dim()));
  }
  const MatD c = cb.centroids.cast<double>();
  std::vector<int> labels(static_cast<std::size_t>(frames.rows()));
  Eigen::Matrix<double, 1, Eigen::Dynamic> row;
  for (Eigen::Index i = 0; i < frames.rows(); ++i) {
    row = frames.row(i).cast<double>();
    labels[i] = nearest(row.data(), c).first;
  }
  return labels;
}

std::vector<int> dedup_runs(std::span<const int> ids) {
  std::vector<int> out;
  for (int id : ids) {
    if (out.empty() || out.back() != id) out.push_back(id);
  }
  return out;
}

void write_codebook(const std::string& path, const Codebook& cb) {
  std::string out = "KMB1";
  put_u32(out, static_cast<std::uint32_t>(cb.k()));
  put_u32(out, static_cast<std::uint32_t>(cb.dim()));
  out.push_back(static_cast<char>(cb.source));
  out.append(reinterpret_cast<const char*>(cb.centroids.data()),
             static_cast<std::size_t>(cb.centroids.size()) * sizeof(float));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("io", "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Codebook read_codebook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io", "cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || std::memcmp(buf.data(), "KMB1", 4) != 0) {
    throw DataError("bad_magic", path + ": not a KMB1 codebook");
  }
  if (buf.size() < 13) throw DataError("truncated_payload", path + ": truncated payload");
  std::uint32_t k = 0, d = 0;
  std::memcpy(&k, buf.data() + 4, 4);
  std::memcpy(&d, buf.data() + 8, 4);
  const auto tag = static_cast<std::uint8_t>(buf[12]);
  if (tag > 2) throw DataError("bad_source_tag", path + ": unknown source tag");
  const std::size_t payload = static_cast<std::size_t>(k) * d * sizeof(float);
  if (buf.size() - 13 != payload) throw DataError("truncated_payload", path + ": truncated payload");
  if (k < 2) throw DataError("bad_codebook", path + ": K must be >= 2");
  Codebook cb;
  cb.source = static_cast<SourceTag>(tag);
  cb.centroids.resize(k, d);
  std::memcpy(cb.centroids.data(), buf.data() + 13, payload);
  if (!cb.centroids.allFinite()) throw DataError("bad_codebook", path + ": non-finite centroid");
  return cb;
}

UnitStoreStats summarize_units(std::span<const UnitRecord> records, int k) {
  UnitStoreStats st;
  st.n_words = static_cast<int>(records.size());
  std::vector<char> used(static_cast<std::size_t>(std::max(k, 0)), 0);
  double units = 0.0, frames = 0.0;
  for (const auto& r : records) {
    units += static_cast<double>(r.units.size());
    frames += r.num_frames;
    for (int u : r.units)
      if (u >= 0 && u < k) used[u] = 1;
  }
  if (st.n_words > 0) {
    st.mean_units_per_word = units / st.n_words;
    st.mean_frames_per_word = frames / st.n_words;
  }
  st.units_used = static_cast<int>(std::count(used.begin(), used.end(), 1));
  return st;
}

UnitStore encode_corpus(std::span<const ManifestEntry> manifest, const std::string& manifest_path,
                        const Codebook& cb, const EncodeOptions& opts) {
  UnitStore store;
  for (const auto& e : manifest) {
    std::string fpath;
    if (!opts.feature_dir.empty()) {
      fpath = (std::filesystem::path(opts.feature_dir) / (e.utt_id + ".afv")).string();
    } else {
      fpath = resolve_path(manifest_path, e.feature_path);
    }
    if (fpath.empty() || !std::filesystem::exists(fpath)) {
      throw DataError("missing_features", "utterance " + e.utt_id + ": feature file not found (" + fpath + ")");
    }
    FrameSequence fs = read_feature_file(fpath, cb.dim());
    if (opts.norm) apply_norm(fs, *opts.norm);
    const auto labels = assign(fs.frames, cb);
    for (const auto& seg : segment_words(fs, e.alignment)) {
      UnitRecord r;
      r.utt_id = e.utt_id;
      r.word = seg.word;
      r.word_index = seg.word_index;
      r.num_frames = seg.end_frame - seg.start_frame;
      r.units = dedup_runs(std::span<const int>(labels).subspan(static_cast<std::size_t>(seg.start_frame),
                                                               static_cast<std::size_t>(r.num_frames)));
      store.records.push_back(std::move(r));
    }
  }
  store.stats = summarize_units(store.records, cb.k());
  log().info("encoded {} words: {:.2f} units/word vs {:.2f} frames/word, {} of {} units used",
             store.stats.n_words, store.stats.mean_units_per_word, store.stats.mean_frames_per_word,
             store.stats.units_used, cb.k());
  return store;
}

void save_unit_store(std::span<const UnitRecord> records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  for (const auto& r : records) {
    out << r.utt_id << '\t' << r.word << '\t' << r.word_index << '\t';
    for (std::size_t i = 0; i < r.units.size(); ++i) {
      if (i) out << ',';
      out << r.units[i];
    }
    out << '\n';
  }
}

std::vector<UnitRecord> load_unit_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open unit store " + path);
  std::vector<UnitRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream f(line);
    UnitRecord r;
    std::string idx, units;
    if (!std::getline(f, r.utt_id, '\t') || !std::getline(f, r.word, '\t') || !std::getline(f, idx, '\t') ||
        !std::getline(f, units)) {
      throw DataError("malformed_units", path + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    r.word_index = std::stoi(idx);
    std::istringstream u(units);
    std::string tok;
    while (std::getline(u, tok, ',')) {
      if (!tok.empty()) r.units.push_back(std::stoi(tok));
    }
    if (r.units.empty()) throw DataError("malformed_units", path + ":" + std::to_string(lineno) + ": empty unit sequence");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace deepskip
