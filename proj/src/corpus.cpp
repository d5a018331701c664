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

#include "deepskip/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "deepskip/eval.hpp"
#include "deepskip/log.hpp"

namespace deepskip {

std::vector<std::string> tokenize_line(std::string_view line) {
  std::vector<std::string> tokens;
  std::string current;
  bool in_token = false;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
    in_token = false;
  };
  for (char ch : line) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else {
      in_token = true;
      if (std::isalnum(c)) current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (in_token) flush();
  return tokens;
}

std::vector<Sentence> tokenize(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    Sentence s;
    std::string_view body = line;
    if (auto tab = body.find('\t'); tab != std::string_view::npos) {
      s.utt_id = std::string(body.substr(0, tab));
      body = body.substr(tab + 1);
    }
    s.tokens = tokenize_line(body);
    if (!s.tokens.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sentence> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open corpus " + path);
  return tokenize(in);
}

Vocabulary Vocabulary::build(std::span<const Sentence> sentences, int min_count) {
  if (min_count < 1) throw ConfigError("min_count", "min_count must be >= 1");
  std::map<std::string, std::int64_t> freq;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) ++freq[t];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [w, c] : freq) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  if (kept.empty()) {
    throw DataError("empty_vocabulary", "empty vocabulary: no word reaches min_count");
  }
  // std::map iteration is lexicographic, so a stable sort on count keeps the tie rule.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return from_counts(std::move(kept));
}

Vocabulary Vocabulary::from_counts(std::vector<std::pair<std::string, std::int64_t>> entries) {
  if (entries.empty()) throw DataError("empty_vocabulary", "empty vocabulary");
  Vocabulary v;
  for (auto& [w, c] : entries) {
    if (c < 1) throw DataError("bad_count", "non-positive count for '" + w + "'");
    if (!v.index_.emplace(w, static_cast<int>(v.words_.size())).second) {
      throw DataError("duplicate_word", "duplicate vocabulary entry '" + w + "'");
    }
    v.words_.push_back(std::move(w));
    v.counts_.push_back(c);
    v.total_ += c;
  }
  return v;
}

std::optional<int> Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocabulary::encode(const Sentence& s) const {
  std::vector<int> ids;
  ids.reserve(s.tokens.size());
  for (const auto& t : s.tokens) ids.push_back(id(t).value_or(-1));
  return ids;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  for (int i = 0; i < size(); ++i) out << words_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open vocabulary " + path);
  std::vector<std::pair<std::string, std::int64_t>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("malformed_vocabulary", path + ":" + std::to_string(lineno) + ": expected word<TAB>count");
    }
    entries.emplace_back(line.substr(0, tab), std::stoll(line.substr(tab + 1)));
  }
  return from_counts(std::move(entries));
}

std::vector<std::pair<int, int>> window_positions(std::span<const int> ids, int window) {
  if (window < 1) throw ConfigError("window", "window must be >= 1");
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(ids.size());
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0) continue;
    const int lo = std::max(0, i - window);
    const int hi = std::min(n - 1, i + window);
    for (int j = lo; j <= hi; ++j) {
      if (j != i && ids[j] >= 0) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<WindowSample> iter_windows(const Sentence& sentence, int window,
                                       const Vocabulary& vocab) {
  const auto ids = vocab.encode(sentence);
  std::vector<WindowSample> out;
  for (auto [i, j] : window_positions(ids, window)) out.push_back({ids[i], ids[j]});
  return out;
}

NegativeSampler::NegativeSampler(std::span<const std::int64_t> counts, double power) {
  if (counts.empty()) throw DataError("empty_vocabulary", "negative sampler needs a non-empty vocabulary");
  cdf_.resize(counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += std::pow(static_cast<double>(counts[i]), power);
    cdf_[i] = acc;
  }
  for (auto& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

int NegativeSampler::draw(Rng& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin());
}

std::vector<int> NegativeSampler::sample(int k, Rng& rng) const {
  std::vector<int> out(static_cast<std::size_t>(k));
  for (auto& v : out) v = draw(rng);
  return out;
}

double NegativeSampler::probability(int id) const {
  return id == 0 ? cdf_[0] : cdf_[id] - cdf_[id - 1];
}

std::vector<int> sample_negatives(const Vocabulary& vocab, int k, Rng& rng, double power) {
  if (k < 1) throw ConfigError("k_neg", "k must be >= 1");
  return NegativeSampler(vocab.counts(), power).sample(k, rng);
}

namespace {

using PairKey = std::pair<int, int>;

PairKey make_key(int a, int b) { return a < b ? PairKey{a, b} : PairKey{b, a}; }

// Round-robin over neighbour ranks: every word contributes its nearest
// neighbour, then its second nearest, and so on, until the quota is met.
template <typename DistFn>
void take_nearest(int m, int quota, DistFn dist, std::set<PairKey>& chosen,
                  std::vector<PairKey>& out) {
  if (quota <= 0 || m < 2) return;
  int depth = std::min(m - 1, std::max(1, quota / m + 2));
  int taken = 0;
  int rank = 0;
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(m));
  auto build_lists = [&](int d) {
    for (int i = 0; i < m; ++i) {
      std::vector<std::pair<double, int>> cand;
      cand.reserve(static_cast<std::size_t>(m - 1));
      for (int j = 0; j < m; ++j) {
        if (j != i) cand.emplace_back(dist(i, j), j);
      }
      std::partial_sort(cand.begin(), cand.begin() + d, cand.end());
      lists[i].clear();
      for (int r = 0; r < d; ++r) lists[i].push_back(cand[r].second);
    }
  };
  build_lists(depth);
  while (taken < quota && rank < m - 1) {
    if (rank >= depth) {
      depth = std::min(m - 1, depth * 2);
      build_lists(depth);
    }
    for (int i = 0; i < m && taken < quota; ++i) {
      auto key = make_key(i, lists[i][rank]);
      if (chosen.insert(key).second) {
        out.push_back(key);
        ++taken;
      }
    }
    ++rank;
  }
}

}  // namespace

std::vector<EvalPair> build_eval_pairs(const Vocabulary& vocab, const WordVectors& baseline,
                                       int n_pairs, Rng& rng) {
  if (n_pairs < 1) throw ConfigError("n_pairs", "n_pairs must be >= 1");
  std::vector<std::string> words;
  std::vector<Eigen::VectorXd> vecs;
  for (int id = 0; id < vocab.size(); ++id) {
    auto row = baseline.find(vocab.word(id));
    if (!row) continue;
    Eigen::VectorXd v = baseline.vector(*row);
    if (v.norm() == 0.0) continue;
    words.push_back(vocab.word(id));
    vecs.push_back(v / v.norm());
  }
  const int m = static_cast<int>(words.size());
  const std::int64_t available = static_cast<std::int64_t>(m) * (m - 1) / 2;
  if (available == 0) throw DataError("no_pairs", "fewer than two evaluation words have baseline vectors");

  auto cos_dist = [&](int i, int j) { return std::clamp(1.0 - vecs[i].dot(vecs[j]), 0.0, 2.0); };

  std::vector<PairKey> keys;
  if (n_pairs >= available) {
    if (n_pairs > available) {
      log().warn("requested {} eval pairs but only {} exist; emitting all", n_pairs, available);
    }
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) keys.emplace_back(i, j);
  } else {
    const int n_sem = n_pairs / 3;
    const int n_edit = n_pairs / 3;
    std::set<PairKey> chosen;
    take_nearest(m, n_sem, cos_dist, chosen, keys);
    take_nearest(
        m, n_edit, [&](int i, int j) { return static_cast<double>(levenshtein(words[i], words[j])); },
        chosen, keys);
    const int n_rand = n_pairs - static_cast<int>(keys.size());
    if (static_cast<std::int64_t>(chosen.size()) + 4 * n_rand >= available) {
      std::vector<PairKey> rest;
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
          if (!chosen.count({i, j})) rest.emplace_back(i, j);
      for (std::size_t i = rest.size(); i > 1; --i) {
        std::swap(rest[i - 1], rest[uniform_index(rng, i)]);
      }
      for (int i = 0; i < n_rand; ++i) keys.push_back(rest[i]);
    } else {
      int got = 0;
      while (got < n_rand) {
        int a = static_cast<int>(uniform_index(rng, m));
        int b = static_cast<int>(uniform_index(rng, m));
        if (a == b) continue;
        auto key = make_key(a, b);
        if (chosen.insert(key).second) {
          keys.push_back(key);
          ++got;
        }
      }
    }
  }

  std::vector<EvalPair> out;
  out.reserve(keys.size());
  for (auto [i, j] : keys) {
    out.push_back({words[i], words[j], cos_dist(i, j), levenshtein(words[i], words[j])});
  }
  return out;
}

void save_eval_pairs(std::span<const EvalPair> pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  char buf[64];
  for (const auto& p : pairs) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.target_cosine_distance);
    out << p.word_a << '\t' << p.word_b << '\t' << buf << '\t' << p.edit_distance << '\n';
  }
}

std::vector<EvalPair> load_eval_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open pairs " + path);
  std::vector<EvalPair> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    EvalPair p;
    std::string cos_s, edit_s;
    if (!std::getline(fields, p.word_a, '\t') || !std::getline(fields, p.word_b, '\t') ||
        !std::getline(fields, cos_s, '\t') || !std::getline(fields, edit_s)) {
      throw DataError("malformed_pairs", path + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    p.target_cosine_distance = std::stod(cos_s);
    p.edit_distance = std::stoi(edit_s);
    if (p.target_cosine_distance < 0.0 || p.target_cosine_distance > 2.0 || p.edit_distance < 0) {
      throw DataError("malformed_pairs", path + ":" + std::to_string(lineno) + ": value out of range");
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace deepskip
