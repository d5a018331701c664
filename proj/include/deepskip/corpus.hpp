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
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deepskip/common.hpp"
#include "deepskip/embeddings.hpp"

namespace deepskip {

struct Sentence {
  std::string utt_id;  // empty when the line carried no id
  std::vector<std::string> tokens;
};

/// Lowercases and strips every character that is not an ASCII letter or
/// digit; whitespace separates tokens.
std::vector<std::string> tokenize_line(std::string_view line);

/// One sentence per non-empty line. A leading "<utt_id>\t" is split off
/// into Sentence::utt_id.
std::vector<Sentence> tokenize(std::istream& in);
std::vector<Sentence> read_corpus(const std::string& path);

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Keeps word types with frequency >= min_count. Ids are assigned by
  /// descending count, ties broken lexicographically.
  /// Throws DataError("empty_vocabulary") when nothing survives.
  static Vocabulary build(std::span<const Sentence> sentences, int min_count);

  /// Rebuilds from (word, count) entries already in id order.
  static Vocabulary from_counts(std::vector<std::pair<std::string, std::int64_t>> entries);

  int size() const { return static_cast<int>(words_.size()); }
  std::optional<int> id(const std::string& word) const;
  const std::string& word(int id) const { return words_[id]; }
  std::int64_t count(int id) const { return counts_[id]; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<std::string>& words() const { return words_; }
  std::int64_t total_count() const { return total_; }

  /// Maps tokens to ids, -1 for out-of-vocabulary tokens.
  std::vector<int> encode(const Sentence& s) const;

  /// One "word\tcount" line per id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, int> index_;
  std::int64_t total_ = 0;
};

struct WindowSample {
  int center;
  int context;

  bool operator==(const WindowSample&) const = default;
};

/// Position pairs (i, j) with 0 < |i - j| <= window over a sequence of
/// ids, skipping negative (out-of-vocabulary) entries. OOV entries still
/// occupy positions.
std::vector<std::pair<int, int>> window_positions(std::span<const int> ids, int window);

std::vector<WindowSample> iter_windows(const Sentence& sentence, int window,
                                       const Vocabulary& vocab);

/// Draws word ids i.i.d. from count^power / Z. power = 1 is the raw
/// unigram distribution.
class NegativeSampler {
 public:
  explicit NegativeSampler(std::span<const std::int64_t> counts, double power = 1.0);

  int draw(Rng& rng) const;
  std::vector<int> sample(int k, Rng& rng) const;
  double probability(int id) const;

 private:
  std::vector<double> cdf_;
};

std::vector<int> sample_negatives(const Vocabulary& vocab, int k, Rng& rng,
                                  double power = 1.0);

struct EvalPair {
  std::string word_a;
  std::string word_b;
  double target_cosine_distance = 0.0;
  int edit_distance = 0;
};

/// Builds n_pairs unique unordered word pairs over the vocabulary words that
/// have a baseline vector: one third nearest by baseline cosine, one third
/// nearest by edit distance, the rest uniformly random. When fewer pairs
/// exist than requested, all of them are emitted with a warning.
std::vector<EvalPair> build_eval_pairs(const Vocabulary& vocab, const WordVectors& baseline,
                                       int n_pairs, Rng& rng);

/// "word_a\tword_b\ttarget_cos_dist\tedit_dist" per line.
void save_eval_pairs(std::span<const EvalPair> pairs, const std::string& path);
std::vector<EvalPair> load_eval_pairs(const std::string& path);

}  // namespace deepskip
