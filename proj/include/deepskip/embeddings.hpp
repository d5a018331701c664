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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace deepskip {

using MatrixXdR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A set of word vectors, one row per word. This is the interchange type
/// between the baseline trainer, the sequence models and evaluation.
class WordVectors {
 public:
  WordVectors() = default;
  WordVectors(std::vector<std::string> words, MatrixXdR vectors);

  std::size_t size() const { return words_.size(); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  const std::vector<std::string>& words() const { return words_; }
  const MatrixXdR& vectors() const { return vectors_; }

  /// Row index of `word`, or nullopt when the word has no vector.
  std::optional<int> find(const std::string& word) const;
  Eigen::VectorXd vector(int row) const { return vectors_.row(row).transpose(); }

 private:
  std::vector<std::string> words_;
  MatrixXdR vectors_;
  std::unordered_map<std::string, int> index_;
};

/// Text format: first line "V D", then "word v1 ... vD" per line.
/// Values are printed with enough digits to round-trip a double.
void save_word_vectors(const WordVectors& wv, const std::string& path);
WordVectors load_word_vectors(const std::string& path);

}  // namespace deepskip
