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

#include "deepskip/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "deepskip/common.hpp"

namespace deepskip {

double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw DataError("dimension_mismatch", "cosine of vectors with different sizes");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw NumericError("zero_vector", "cosine distance of a zero vector");
  return std::clamp(1.0 - a.dot(b) / (na * nb), 0.0, 2.0);
}

int levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 0; i < a.size(); ++i) {
    cur[0] = static_cast<int>(i + 1);
    for (std::size_t j = 0; j < b.size(); ++j) {
      cur[j + 1] = std::min({prev[j + 1] + 1, cur[j] + 1, prev[j] + (a[i] == b[j] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DataError("length_mismatch", "pearson needs two equal-length series of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("zero_variance", "pearson of a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationReport correlation_report(const WordVectors& embeddings,
                                     std::span<const EvalPair> pairs, int epoch) {
  std::vector<double> model, target, edit;
  CorrelationReport rep;
  rep.epoch = epoch;
  for (const auto& p : pairs) {
    auto a = embeddings.find(p.word_a);
    auto b = embeddings.find(p.word_b);
    if (!a || !b) {
      ++rep.n_excluded;
      continue;
    }
    const auto& m = embeddings.vectors();
    const double na = m.row(*a).norm();
    const double nb = m.row(*b).norm();
    if (na == 0.0 || nb == 0.0) {
      ++rep.n_excluded;
      continue;
    }
    model.push_back(std::clamp(1.0 - m.row(*a).dot(m.row(*b)) / (na * nb), 0.0, 2.0));
    target.push_back(p.target_cosine_distance);
    edit.push_back(static_cast<double>(p.edit_distance));
  }
  rep.n_pairs = static_cast<int>(model.size());
  if (rep.n_pairs < 2) {
    throw DataError("too_few_pairs", "fewer than 2 usable evaluation pairs (" +
                                         std::to_string(rep.n_excluded) + " excluded)");
  }
  rep.r_cosine = pearson(model, target);
  rep.r_edit = pearson(model, edit);
  return rep;
}

NeighborTable nearest_neighbors(const std::string& word, const WordVectors& embeddings, int k) {
  auto q = embeddings.find(word);
  if (!q) throw DataError("oov", "word '" + word + "' has no embedding");
  const auto& m = embeddings.vectors();
  const double nq = m.row(*q).norm();
  if (nq == 0.0) throw NumericError("zero_vector", "query '" + word + "' has a zero embedding");
  std::vector<std::pair<double, int>> scored;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i == *q) continue;
    const double ni = m.row(i).norm();
    const double sim = ni == 0.0 ? 0.0 : m.row(i).dot(m.row(*q)) / (ni * nq);
    scored.emplace_back(sim, static_cast<int>(i));
  }
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    [](const auto& x, const auto& y) {
                      return x.first != y.first ? x.first > y.first : x.second < y.second;
                    });
  NeighborTable t{word, {}};
  for (std::size_t i = 0; i < take; ++i) {
    t.neighbors.push_back({embeddings.words()[scored[i].second], scored[i].first});
  }
  return t;
}

void print_neighbor_table(std::ostream& out, const NeighborTable& table) {
  std::size_t width = 4;
  for (const auto& n : table.neighbors) width = std::max(width, n.word.size());
  out << "query: " << table.query << '\n';
  char buf[128];
  int rank = 1;
  for (const auto& n : table.neighbors) {
    std::snprintf(buf, sizeof(buf), "%3d  %-*s  %8.4f\n", rank++, static_cast<int>(width),
                  n.word.c_str(), n.similarity);
    out << buf;
  }
}

void print_neighbor_records(std::ostream& out, const NeighborTable& table) {
  char buf[64];
  int rank = 1;
  for (const auto& n : table.neighbors) {
    std::snprintf(buf, sizeof(buf), "%.9g", n.similarity);
    out << table.query << '\t' << rank++ << '\t' << n.word << '\t' << buf << '\n';
  }
}

SlotCorpus make_slot_corpus(int n_classes, int words_per_class, int n_sentences,
                            std::uint64_t seed, int slots_per_sentence) {
  if (n_classes < 2 || words_per_class < 2 || n_sentences < 2 || slots_per_sentence < 2) {
    throw ConfigError("slot_corpus", "slot corpus counts must all be >= 2");
  }
  auto rng = make_rng(seed, "slot-corpus");
  SlotCorpus c;
  std::set<std::string> seen;
  const int n_words = n_classes * words_per_class;
  while (static_cast<int>(c.words.size()) < n_words) {
    const int len = 3 + static_cast<int>(uniform_index(rng, 5));
    std::string w;
    for (int i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + uniform_index(rng, 26)));
    if (seen.insert(w).second) {
      c.labels.push_back(static_cast<int>(c.words.size()) / words_per_class);
      c.words.push_back(std::move(w));
    }
  }
  c.sentences.reserve(static_cast<std::size_t>(n_sentences));
  for (int s = 0; s < n_sentences; ++s) {
    const int cls = static_cast<int>(uniform_index(rng, n_classes));
    Sentence sent;
    for (int k = 0; k < slots_per_sentence; ++k) {
      sent.tokens.push_back(c.words[cls * words_per_class + uniform_index(rng, words_per_class)]);
    }
    c.sentences.push_back(std::move(sent));
  }
  return c;
}

double class_separation(const WordVectors& embeddings, std::span<const std::string> words,
                        std::span<const int> labels) {
  std::vector<Eigen::VectorXd> vecs;
  std::vector<int> lab;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto row = embeddings.find(words[i]);
    if (!row) continue;
    Eigen::VectorXd v = embeddings.vector(*row);
    if (v.norm() == 0.0) continue;
    vecs.push_back(v.normalized());
    lab.push_back(labels[i]);
  }
  double intra = 0.0, inter = 0.0;
  long n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (std::size_t j = i + 1; j < vecs.size(); ++j) {
      const double s = vecs[i].dot(vecs[j]);
      if (lab[i] == lab[j]) {
        intra += s;
        ++n_intra;
      } else {
        inter += s;
        ++n_inter;
      }
    }
  }
  if (n_intra == 0 || n_inter == 0) throw DataError("too_few_words", "class separation needs both intra- and inter-class pairs");
  return intra / static_cast<double>(n_intra) - inter / static_cast<double>(n_inter);
}

}  // namespace deepskip
