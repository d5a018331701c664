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
#include <map>
#include <unordered_map>

#include "deepskip/log.hpp"
#include "deepskip/models.hpp"
#include "json.hpp"

namespace deepskip {

const char* input_mode_name(InputMode mode) {
  switch (mode) {
    case InputMode::kChars: return "chars";
    case InputMode::kUnits: return "units";
    case InputMode::kFrames: return "frames";
  }
  return "chars";
}

InputMode parse_input_mode(const std::string& name) {
  if (name == "chars") return InputMode::kChars;
  if (name == "units") return InputMode::kUnits;
  if (name == "frames") return InputMode::kFrames;
  throw ConfigError("input_mode", "unknown input mode '" + name + "' (chars, units, frames)");
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const char* field, const std::string& rule) {
    if (!ok) throw ConfigError(field, std::string(field) + " must be " + rule);
  };
  need(s >= 1, "s", ">= 1");
  need(window >= 1, "window", ">= 1");
  need(k_neg >= 1, "k_neg", ">= 1");
  need(epochs >= 1, "epochs", ">= 1");
  need(batch_size >= 1, "batch_size", ">= 1");
  need(lr > 0.0, "lr", "> 0");
  need(clip_norm >= 0.0, "clip_norm", ">= 0");
  need(neg_power >= 0.0, "neg_power", ">= 0");
  need(ae_epochs >= 0, "ae_epochs", ">= 0");
  need(ae_batch_size >= 1, "ae_batch_size", ">= 1");
  need(ae_lr > 0.0, "ae_lr", "> 0");
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["s"] = s;
  j["gru_layers"] = gru_layers();
  j["linear_layers"] = linear_layers();
  j["hidden"] = hidden();
  j["embedding_dim"] = embedding_dim();
  j["window"] = window;
  j["k_neg"] = k_neg;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["lr"] = lr;
  j["clip_norm"] = clip_norm;
  j["neg_power"] = neg_power;
  j["seed"] = seed;
  j["input"] = input_mode_name(input);
  j["tied_encoder"] = tied_encoder;
  j["relu"] = relu;
  j["ae_epochs"] = ae_epochs;
  j["ae_batch_size"] = ae_batch_size;
  j["ae_lr"] = ae_lr;
  return j.dump();
}

int char_id(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c >= 'A' && c <= 'Z') return c - 'A';
  return kCharAlphabet - 1;
}

std::vector<int> char_sequence(const std::string& word) {
  std::vector<int> out;
  out.reserve(word.size());
  for (char c : word) out.push_back(char_id(c));
  return out;
}

int SequenceLexicon::length(int item) const {
  return mode == InputMode::kFrames ? static_cast<int>(frames[item].rows()) : static_cast<int>(ids[item].size());
}

void SequenceLexicon::validate() const {
  const std::size_t n = item_word.size();
  if (mode == InputMode::kFrames) {
    if (frames.size() != n) throw DataError("lexicon_size", "frame lexicon size mismatch");
    for (const auto& f : frames) {
      if (f.rows() == 0) throw DataError("empty_sequence", "frame lexicon holds an empty sequence");
      if (f.cols() != frame_dim) throw DataError("dimension_mismatch", "frame lexicon dimension mismatch");
      if (!f.allFinite()) throw DataError("non_finite_input", "frame lexicon holds non-finite values");
    }
    return;
  }
  if (ids.size() != n) throw DataError("lexicon_size", "lexicon size mismatch");
  for (const auto& s : ids) {
    if (s.empty()) throw DataError("empty_sequence", "lexicon holds an empty sequence");
    for (int v : s)
      if (v < 0 || v >= alphabet) throw DataError("id_out_of_range", "sequence id outside the alphabet");
  }
}

namespace {

void index_items(SkipgramCorpus& c) {
  c.items_of_word.assign(static_cast<std::size_t>(c.vocab.size()), {});
  for (int i = 0; i < c.lexicon.size(); ++i) c.items_of_word[c.lexicon.item_word[i]].push_back(i);
}

struct Occurrence {
  std::string word;
  int word_index;
  std::size_t source;
};

// Occurrences grouped by utterance in first-appearance order, sorted by
// word_index inside each utterance.
template <typename Get>
std::vector<std::vector<Occurrence>> group_by_utterance(std::size_t n, Get get) {
  std::vector<std::vector<Occurrence>> groups;
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < n; ++i) {
    auto [utt, word, idx] = get(i);
    auto [it, fresh] = where.try_emplace(utt, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back({word, idx, i});
  }
  for (auto& g : groups)
    std::stable_sort(g.begin(), g.end(), [](const Occurrence& a, const Occurrence& b) {
      return a.word_index < b.word_index;
    });
  return groups;
}

Vocabulary vocab_of(const std::vector<std::vector<Occurrence>>& groups, int min_count) {
  std::vector<Sentence> sents;
  for (const auto& g : groups) {
    Sentence s;
    for (const auto& o : g) s.tokens.push_back(o.word);
    sents.push_back(std::move(s));
  }
  return Vocabulary::build(sents, min_count);
}

}  // namespace

SkipgramCorpus make_char_corpus(std::span<const Sentence> sentences, const Vocabulary& vocab) {
  SkipgramCorpus c;
  c.vocab = vocab;
  c.lexicon.mode = InputMode::kChars;
  c.lexicon.alphabet = kCharAlphabet;
  for (int w = 0; w < vocab.size(); ++w) {
    if (vocab.word(w).empty()) throw DataError("empty_word", "vocabulary holds an empty word");
    c.lexicon.ids.push_back(char_sequence(vocab.word(w)));
    c.lexicon.item_word.push_back(w);
  }
  for (const auto& s : sentences) c.utterances.push_back(vocab.encode(s));
  index_items(c);
  return c;
}

SkipgramCorpus make_unit_corpus(std::span<const UnitRecord> records, int k, int min_count) {
  if (k < 1) throw ConfigError("k", "unit alphabet size must be >= 1");
  auto groups = group_by_utterance(records.size(), [&](std::size_t i) {
    return std::tuple<std::string, std::string, int>(records[i].utt_id, records[i].word, records[i].word_index);
  });
  SkipgramCorpus c;
  c.vocab = vocab_of(groups, min_count);
  c.lexicon.mode = InputMode::kUnits;
  c.lexicon.alphabet = k;
  for (const auto& g : groups) {
    std::vector<int> utt;
    for (const auto& o : g) {
      const auto id = c.vocab.id(o.word);
      const auto& units = records[o.source].units;
      if (!id || units.empty()) {
        utt.push_back(-1);
        continue;
      }
      utt.push_back(c.lexicon.size());
      c.lexicon.ids.push_back(units);
      c.lexicon.item_word.push_back(*id);
    }
    c.utterances.push_back(std::move(utt));
  }
  c.lexicon.validate();
  index_items(c);
  return c;
}

SkipgramCorpus make_frame_corpus(std::span<const ManifestEntry> manifest, const std::string& manifest_path,
                                 const std::optional<NormStats>& norm, int min_count,
                                 const std::string& feature_dir) {
  struct Seg {
    std::string utt, word;
    int index;
    MatrixXfR frames;
  };
  std::vector<Seg> segs;
  int dim = -1;
  for (const auto& e : manifest) {
    std::string path = feature_dir.empty() ? resolve_path(manifest_path, e.feature_path)
                                           : (std::filesystem::path(feature_dir) / (e.utt_id + ".afv")).string();
    if (!std::filesystem::exists(path)) {
      throw DataError("missing_features", "utterance " + e.utt_id + ": feature file not found (" + path + ")");
    }
    FrameSequence fs = read_feature_file(path, dim > 0 ? std::optional<int>(dim) : std::nullopt);
    dim = static_cast<int>(fs.frames.cols());
    if (norm) apply_norm(fs, *norm);
    for (const auto& ws : segment_words(fs, e.alignment)) {
      segs.push_back({e.utt_id, ws.word, ws.word_index,
                      fs.frames.middleRows(ws.start_frame, ws.end_frame - ws.start_frame)});
    }
  }
  auto groups = group_by_utterance(segs.size(), [&](std::size_t i) {
    return std::tuple<std::string, std::string, int>(segs[i].utt, segs[i].word, segs[i].index);
  });
  SkipgramCorpus c;
  c.vocab = vocab_of(groups, min_count);
  c.lexicon.mode = InputMode::kFrames;
  c.lexicon.frame_dim = dim;
  for (const auto& g : groups) {
    std::vector<int> utt;
    for (const auto& o : g) {
      const auto id = c.vocab.id(o.word);
      if (!id) {
        utt.push_back(-1);
        continue;
      }
      utt.push_back(c.lexicon.size());
      c.lexicon.frames.push_back(std::move(segs[o.source].frames));
      c.lexicon.item_word.push_back(*id);
    }
    c.utterances.push_back(std::move(utt));
  }
  c.lexicon.validate();
  index_items(c);
  return c;
}

std::vector<Sentence> unit_store_sentences(std::span<const UnitRecord> records) {
  auto groups = group_by_utterance(records.size(), [&](std::size_t i) {
    return std::tuple<std::string, std::string, int>(records[i].utt_id, records[i].word, records[i].word_index);
  });
  std::vector<Sentence> out;
  for (const auto& g : groups) {
    Sentence s;
    s.utt_id = records[g.front().source].utt_id;
    for (const auto& o : g) s.tokens.push_back(o.word);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<int, int>> skipgram_pairs(const SkipgramCorpus& corpus, int window) {
  std::vector<std::pair<int, int>> out;
  for (const auto& utt : corpus.utterances)
    for (auto [i, j] : window_positions(utt, window)) out.emplace_back(utt[i], utt[j]);
  return out;
}

ItemSampler::ItemSampler(const SkipgramCorpus& corpus, double power)
    : words_(corpus.vocab.counts(), power), items_(&corpus.items_of_word) {
  for (const auto& v : corpus.items_of_word)
    if (v.empty()) throw DataError("word_without_items", "every vocabulary word needs an input sequence");
}

int ItemSampler::draw(Rng& rng) const {
  const auto& items = (*items_)[words_.draw(rng)];
  return items.size() == 1 ? items[0] : items[uniform_index(rng, items.size())];
}

SkipgramBatch make_batch(std::span<const std::pair<int, int>> pairs, std::span<const int> negatives, int k) {
  SkipgramBatch b;
  b.k = k;
  std::unordered_map<int, int> cmap, omap;
  auto local = [](std::unordered_map<int, int>& m, std::vector<int>& list, int item) {
    auto [it, fresh] = m.try_emplace(item, static_cast<int>(list.size()));
    if (fresh) list.push_back(item);
    return it->second;
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    b.c.push_back(local(cmap, b.center_items, pairs[i].first));
    b.o.push_back(local(omap, b.context_items, pairs[i].second));
    for (int j = 0; j < k; ++j) b.neg.push_back(local(omap, b.context_items, negatives[i * k + j]));
  }
  return b;
}

WordVectors pool_by_word(const SkipgramCorpus& corpus, const MatrixXdR& item_vectors) {
  std::vector<std::string> words;
  std::vector<int> rows;
  for (int w = 0; w < corpus.vocab.size(); ++w) {
    if (corpus.items_of_word[w].empty()) continue;
    words.push_back(corpus.vocab.word(w));
    rows.push_back(w);
  }
  MatrixXdR out = MatrixXdR::Zero(static_cast<Eigen::Index>(rows.size()), item_vectors.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& items = corpus.items_of_word[rows[r]];
    for (int it : items) out.row(static_cast<Eigen::Index>(r)) += item_vectors.row(it);
    out.row(static_cast<Eigen::Index>(r)) /= static_cast<double>(items.size());
  }
  return WordVectors(std::move(words), std::move(out));
}

}  // namespace deepskip
