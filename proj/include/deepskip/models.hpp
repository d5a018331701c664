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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepskip/audio.hpp"
#include "deepskip/corpus.hpp"
#include "deepskip/discretize.hpp"
#include "deepskip/embeddings.hpp"
#include "deepskip/eval.hpp"
#include "deepskip/nn/gru.hpp"
#include "deepskip/nn/linear.hpp"

namespace deepskip {

enum class InputMode { kChars, kUnits, kFrames };

const char* input_mode_name(InputMode mode);
InputMode parse_input_mode(const std::string& name);

struct ModelConfig {
  int s = 1;
  int window = 5;
  int k_neg = 10;
  int epochs = 100;
  int batch_size = 256;
  double lr = 1e-3;
  double clip_norm = 5.0;
  double neg_power = 1.0;
  std::uint64_t seed = 1;
  InputMode input = InputMode::kChars;
  bool tied_encoder = true;
  bool relu = false;  // ReLU between projection layers
  int ae_epochs = 30;
  int ae_batch_size = 64;
  double ae_lr = 1e-3;

  int hidden() const { return 50 * s; }
  int gru_layers() const { return s; }
  int linear_layers() const { return s; }
  int embedding_dim() const { return 2 * hidden(); }
  int input_embedding_dim() const { return hidden() < 64 ? hidden() : 64; }

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  std::string to_json() const;
};

/// a..z map to 0..25; anything else (apostrophe, digits) to 26.
inline constexpr int kCharAlphabet = 27;
int char_id(char c);
std::vector<int> char_sequence(const std::string& word);

/// Input sequences for the sequence models. An item is a word type in char
/// mode and a single word occurrence in unit and frame mode.
struct SequenceLexicon {
  InputMode mode = InputMode::kChars;
  int alphabet = 0;   // chars and units
  int frame_dim = 0;  // frames
  std::vector<std::vector<int>> ids;  // chars and units, per item
  std::vector<MatrixXfR> frames;      // frames, per item
  std::vector<int> item_word;         // vocabulary id of each item

  int size() const { return static_cast<int>(item_word.size()); }
  int length(int item) const;
  /// Throws DataError for empty sequences or ids outside the alphabet.
  void validate() const;
};

struct SkipgramCorpus {
  Vocabulary vocab;
  SequenceLexicon lexicon;
  std::vector<std::vector<int>> utterances;     // item per position, -1 when out of vocabulary
  std::vector<std::vector<int>> items_of_word;  // per vocabulary id
};

SkipgramCorpus make_char_corpus(std::span<const Sentence> sentences, const Vocabulary& vocab);
/// Groups occurrences by utterance (first-appearance order) and orders them
/// by word_index. Words below min_count stay in place as -1.
SkipgramCorpus make_unit_corpus(std::span<const UnitRecord> records, int k, int min_count);
/// Continuous input: normalized frames of every aligned word occurrence.
SkipgramCorpus make_frame_corpus(std::span<const ManifestEntry> manifest, const std::string& manifest_path,
                                 const std::optional<NormStats>& norm, int min_count,
                                 const std::string& feature_dir = {});

/// Transcript sentences of a unit store, in the same utterance order.
std::vector<Sentence> unit_store_sentences(std::span<const UnitRecord> records);

/// (center item, context item) for every window pair of every utterance.
std::vector<std::pair<int, int>> skipgram_pairs(const SkipgramCorpus& corpus, int window);

/// Draws k negative items per call: a word from count^power, then a
/// uniformly chosen occurrence of it.
class ItemSampler {
 public:
  ItemSampler(const SkipgramCorpus& corpus, double power);
  int draw(Rng& rng) const;

 private:
  NegativeSampler words_;
  const std::vector<std::vector<int>>* items_;
};

/// A batch of B positive pairs with k negatives each. Items are listed once
/// per side; c, o and neg index into center_items / context_items.
struct SkipgramBatch {
  int k = 0;
  std::vector<int> center_items;
  std::vector<int> context_items;
  std::vector<int> c;    // B
  std::vector<int> o;    // B
  std::vector<int> neg;  // B * k

  int size() const { return static_cast<int>(c.size()); }
};

SkipgramBatch make_batch(std::span<const std::pair<int, int>> pairs, std::span<const int> negatives, int k);

/// Mean SGNS loss over the batch given projected center rows pc and
/// context-side rows po. Gradients are written when dpc/dpo are non-null.
template <typename T>
T sgns_batch_loss(const SkipgramBatch& b, const nn::Mat<T>& pc, const nn::Mat<T>& po, nn::Mat<T>* dpc,
                  nn::Mat<T>* dpo);

/// Id-embedding table (chars, units) or pass-through (frames) feeding a
/// stacked bidirectional GRU.
template <typename T>
class SequenceEncoder {
 public:
  struct Cache {
    std::unique_ptr<nn::PackedLayout> layout;
    typename nn::GruEncoder<T>::Cache gru;
    std::vector<int> items;
  };

  SequenceEncoder() = default;
  SequenceEncoder(const std::string& name, const SequenceLexicon& lex, const ModelConfig& cfg, Rng& rng);

  int embedding_dim() const { return gru_.embedding_dim(); }
  int input_dim() const { return gru_.shape().input; }
  nn::ParamList<T> params();

  nn::Mat<T> forward(const SequenceLexicon& lex, std::span<const int> items, Cache& cache) const;
  nn::Mat<T> forward(const SequenceLexicon& lex, std::span<const int> items) const;
  void backward(const SequenceLexicon& lex, const Cache& cache, const nn::Mat<T>& grad);

 private:
  InputMode mode_ = InputMode::kChars;
  bool has_table_ = false;
  nn::Param<T> table_;
  nn::GruEncoder<T> gru_;
};

/// Sequence auto-encoder: the encoder state initialises a single-direction
/// GRU decoder fed <s> then the sequence (teacher forcing) and trained to
/// emit the sequence then </s> under cross-entropy.
template <typename T>
class AutoencoderNet {
 public:
  AutoencoderNet() = default;
  AutoencoderNet(const SequenceLexicon& lex, const ModelConfig& cfg, Rng& rng);

  nn::ParamList<T> params();
  SequenceEncoder<T>& encoder() { return enc_; }
  /// Mean per-token cross-entropy; accumulates gradients when `backward`.
  T loss(const SequenceLexicon& lex, std::span<const int> items, bool backward);
  nn::Mat<T> embed(const SequenceLexicon& lex, std::span<const int> items) const;

 private:
  int alphabet_ = 0;
  SequenceEncoder<T> enc_;
  nn::Param<T> dec_table_;  // (A + 1) x d_in, row A is <s>
  nn::GruDirection<T> dec_;
  nn::Param<T> out_w_;  // E x (A + 1), column A is </s>
  nn::Param<T> out_b_;
};

/// Shared (or, untied, separate) sequence encoder followed by center and
/// context linear stacks; score = dot product of the projections.
template <typename T>
class EndToEndNet {
 public:
  EndToEndNet() = default;
  EndToEndNet(const SequenceLexicon& lex, const ModelConfig& cfg, Rng& rng);

  nn::ParamList<T> params();
  T batch_loss(const SequenceLexicon& lex, const SkipgramBatch& b, bool backward);
  /// Center-side embeddings: encoder then center projection.
  nn::Mat<T> embed(const SequenceLexicon& lex, std::span<const int> items) const;

 private:
  bool tied_ = true;
  SequenceEncoder<T> enc_;
  SequenceEncoder<T> ctx_enc_;
  nn::LinearStack<T> center_;
  nn::LinearStack<T> context_;
};

/// Frozen per-item inputs through center and context linear stacks.
template <typename T>
class TwoStageNet {
 public:
  TwoStageNet() = default;
  TwoStageNet(int input_dim, const ModelConfig& cfg, Rng& rng);

  nn::ParamList<T> params();
  T batch_loss(const nn::Mat<T>& stage1, const SkipgramBatch& b, bool backward);
  nn::Mat<T> embed(const nn::Mat<T>& stage1, std::span<const int> items) const;

 private:
  nn::LinearStack<T> center_;
  nn::LinearStack<T> context_;
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;  // mean per positive pair
  std::optional<CorrelationReport> report;
  double seconds = 0.0;  // wall clock for the epoch, evaluation included
};

using EpochHook = std::function<void(const EpochMetrics&, const WordVectors&)>;

struct TrainOptions {
  std::span<const EvalPair> pairs;  // no correlation report when empty
  EpochHook on_epoch;
};

struct AutoencoderResult {
  std::vector<double> epoch_loss;
  MatrixXdR item_embeddings;  // one row per lexicon item
  WordVectors type_embeddings;  // mean over each type's items
};

struct TrainResult {
  WordVectors embeddings;
  std::vector<EpochMetrics> history;
  std::shared_ptr<EndToEndNet<float>> net;  // end-to-end runs only
};

/// Throws NumericError("non_finite_loss") on divergence.
AutoencoderResult train_autoencoder(const SkipgramCorpus& corpus, const ModelConfig& cfg);
/// `stage1` holds one frozen row per lexicon item and is never modified.
TrainResult train_two_stage(const SkipgramCorpus& corpus, const MatrixXdR& stage1, const ModelConfig& cfg,
                            const TrainOptions& opts = {});
TrainResult train_end_to_end(const SkipgramCorpus& corpus, const ModelConfig& cfg, const TrainOptions& opts = {});
/// End-to-end training on continuous frames (frame-mode corpus).
TrainResult train_continuous_baseline(const SkipgramCorpus& corpus, const ModelConfig& cfg,
                                      const TrainOptions& opts = {});

/// Mean of rows per vocabulary word; words without items are left out.
WordVectors pool_by_word(const SkipgramCorpus& corpus, const MatrixXdR& item_vectors);

/// Type embedding of `word`: encoded afresh in char mode, the occurrence
/// mean otherwise. Throws DataError("oov") for unknown words.
Eigen::VectorXd embed_word(const std::string& word, const SkipgramCorpus& corpus, const EndToEndNet<float>& net);

/// "epoch,loss,r_cosine,r_edit,seconds"
void write_metrics_csv(std::span<const EpochMetrics> history, const std::string& path);

}  // namespace deepskip
