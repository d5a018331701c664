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

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepskip/corpus.hpp"
#include "deepskip/embeddings.hpp"

namespace deepskip {

/// 1 - cos(a, b), in [0, 2]. Throws NumericError("zero_vector") if either
/// argument has zero norm.
double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b);

/// Unit-cost edit distance, two-row dynamic program.
int levenshtein(std::string_view a, std::string_view b);

/// Throws DataError("length_mismatch") for unequal or short inputs and
/// NumericError("zero_variance") when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
  int epoch = 0;
  double r_cosine = 0.0;
  double r_edit = 0.0;
  int n_pairs = 0;     // pairs used
  int n_excluded = 0;  // pairs dropped for OOV or zero vectors
};

/// Pearson correlation of model cosine distances against the pairs' target
/// cosine distances and against their edit distances.
CorrelationReport correlation_report(const WordVectors& embeddings,
                                     std::span<const EvalPair> pairs, int epoch = 0);

struct Neighbor {
  std::string word;
  double similarity;
};

struct NeighborTable {
  std::string query;
  std::vector<Neighbor> neighbors;  // non-increasing similarity
};

/// Top-k by cosine similarity, query excluded, ties by row order.
NeighborTable nearest_neighbors(const std::string& word, const WordVectors& embeddings, int k);

void print_neighbor_table(std::ostream& out, const NeighborTable& table);
void print_neighbor_records(std::ostream& out, const NeighborTable& table);

struct SlotCorpus {
  std::vector<Sentence> sentences;
  std::vector<std::string> words;  // all word types
  std::vector<int> labels;         // class of words[i]
};

/// Template sentences whose slots are all filled uniformly from one class
/// picked per sentence, so members of a class share context distributions
/// exactly. Word strings are random letter strings, unrelated to class.
SlotCorpus make_slot_corpus(int n_classes, int words_per_class, int n_sentences,
                            std::uint64_t seed, int slots_per_sentence = 4);

/// Mean pairwise cosine similarity inside classes minus across classes.
double class_separation(const WordVectors& embeddings, std::span<const std::string> words,
                        std::span<const int> labels);

}  // namespace deepskip
