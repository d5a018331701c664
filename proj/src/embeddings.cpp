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

#include "deepskip/embeddings.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "deepskip/common.hpp"

namespace deepskip {

WordVectors::WordVectors(std::vector<std::string> words, MatrixXdR vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows()) {
    throw DataError("dimension_mismatch", "word list and vector rows differ in size");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], static_cast<int>(i));
  }
}

std::optional<int> WordVectors::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void save_word_vectors(const WordVectors& wv, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  out << wv.size() << ' ' << wv.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < wv.size(); ++i) {
    out << wv.words()[i];
    for (int d = 0; d < wv.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), " %.17g", wv.vectors()(static_cast<Eigen::Index>(i), d));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("io", "write failed for " + path);
}

WordVectors load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open " + path);
  std::size_t v = 0;
  int d = 0;
  if (!(in >> v >> d) || d < 1) {
    throw DataError("malformed_embeddings", path + ": bad 'V D' header");
  }
  std::vector<std::string> words(v);
  MatrixXdR m(static_cast<Eigen::Index>(v), d);
  for (std::size_t i = 0; i < v; ++i) {
    if (!(in >> words[i])) throw DataError("malformed_embeddings", path + ": missing rows");
    for (int j = 0; j < d; ++j) {
      if (!(in >> m(static_cast<Eigen::Index>(i), j))) {
        throw DataError("malformed_embeddings", path + ": short row for '" + words[i] + "'");
      }
    }
  }
  return WordVectors(std::move(words), std::move(m));
}

}  // namespace deepskip
