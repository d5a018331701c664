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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepskip/audio.hpp"

namespace deepskip {

struct Codebook {
  MatrixXfR centroids;  // K x D
  SourceTag source = SourceTag::kMfcc;
  double inertia = 0.0;  // sum of squared distances on the fitting frames

  int k() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
};

struct KMeansConfig {
  int k = 100;
  int max_iters = 100;
  double tol = 1e-4;  // stop when (prev - cur) / prev < tol
  std::uint64_t seed = 1;
  int n_init = 1;     // independent k-means++ restarts, best inertia kept
  long max_frames = 2'000'000;  // random subsample above this; <= 0 fits all frames

  void validate() const;
};

struct KMeansResult {
  Codebook codebook;
  std::vector<int> assignment;         // final labels of the fitting frames
  std::vector<double> inertia_history; // one value per Lloyd assignment step
  int iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeding on squared Euclidean distance.
/// An empty cluster is moved to the point farthest from its own centroid.
/// Needs N >= K.
KMeansResult kmeans_fit(const MatrixXfR& frames, const KMeansConfig& cfg);

/// Index of the nearest centroid per frame; ties go to the lowest id.
std::vector<int> assign(const MatrixXfR& frames, const Codebook& cb);

/// Collapses maximal runs of equal ids into one id.
std::vector<int> dedup_runs(std::span<const int> ids);

/// KMB1: "KMB1", u32 K, u32 D, u8 source_tag, K*D f32 little-endian.
void write_codebook(const std::string& path, const Codebook& cb);
Codebook read_codebook(const std::string& path);

struct UnitRecord {
  std::string utt_id;
  std::string word;
  int word_index = 0;
  std::vector<int> units;
  int num_frames = 0;  // segment length before assignment and dedup
};

struct UnitStoreStats {
  int n_words = 0;
  double mean_units_per_word = 0.0;
  double mean_frames_per_word = 0.0;
  int units_used = 0;  // distinct cluster ids that occur
};

struct UnitStore {
  std::vector<UnitRecord> records;
  UnitStoreStats stats;
};

struct EncodeOptions {
  std::optional<NormStats> norm;         // applied to features before assignment
  std::string feature_dir;               // overrides manifest feature paths when set
};

/// Slices each aligned word out of its utterance features, assigns frames
/// to clusters and dedups. Keyed by (utt_id, word_index).
UnitStore encode_corpus(std::span<const ManifestEntry> manifest, const std::string& manifest_path,
                        const Codebook& cb, const EncodeOptions& opts = {});

UnitStoreStats summarize_units(std::span<const UnitRecord> records, int k);

/// "utt_id\tword\tword_index\tu1,u2,...,un" per line.
void save_unit_store(std::span<const UnitRecord> records, const std::string& path);
std::vector<UnitRecord> load_unit_store(const std::string& path);

}  // namespace deepskip
