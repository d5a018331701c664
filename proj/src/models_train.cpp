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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "deepskip/log.hpp"
#include "deepskip/models.hpp"
#include "deepskip/nn/adam.hpp"

namespace deepskip {

using nn::Mat;

namespace {

using Clock = std::chrono::steady_clock;

template <typename V>
void shuffle_in_place(std::vector<V>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

MatrixXdR to_double(const Mat<float>& m) { return m.cast<double>(); }

void check_finite(double loss, const char* what, int epoch) {
  if (!std::isfinite(loss)) {
    throw NumericError("non_finite_loss", std::string(what) + " loss became non-finite in epoch " +
                                              std::to_string(epoch) + "; lower the learning rate or check the inputs");
  }
}

std::vector<int> all_items(const SkipgramCorpus& c) {
  std::vector<int> v(static_cast<std::size_t>(c.lexicon.size()));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void log_epoch(const char* what, const EpochMetrics& m) {
  if (m.report) {
    log().info("{} epoch {} loss {:.6f} r_cosine {:.4f} r_edit {:.4f} ({:.1f}s)", what, m.epoch, m.loss,
               m.report->r_cosine, m.report->r_edit, m.seconds);
  } else {
    log().info("{} epoch {} loss {:.6f} ({:.1f}s)", what, m.epoch, m.loss, m.seconds);
  }
}

// Shared skipgram loop: shuffled window pairs, k sampled negatives per
// pair, Adam with global-norm clipping, per-epoch evaluation.
template <typename LossFn, typename EmbedFn>
TrainResult run_skipgram(const char* what, const SkipgramCorpus& corpus, const ModelConfig& cfg,
                         const TrainOptions& opts, const nn::ParamList<float>& params, LossFn batch_loss,
                         EmbedFn embed_types) {
  auto pairs = skipgram_pairs(corpus, cfg.window);
  if (pairs.empty()) throw DataError("no_training_pairs", "corpus yields no window pairs");
  const ItemSampler sampler(corpus, cfg.neg_power);
  Rng shuffle_rng = make_rng(cfg.seed, "skipgram.shuffle");
  Rng neg_rng = make_rng(cfg.seed, "skipgram.negatives");
  nn::Adam<float> opt(params, {cfg.lr});
  log().info("{}: {} pairs, {} items, {} words, {} parameters", what, pairs.size(), corpus.lexicon.size(),
             corpus.vocab.size(), nn::count_params(params));
  TrainResult res;
  std::vector<int> negs;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    shuffle_in_place(pairs, shuffle_rng);
    double total = 0.0;
    for (std::size_t s = 0; s < pairs.size(); s += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t n = std::min(static_cast<std::size_t>(cfg.batch_size), pairs.size() - s);
      negs.resize(n * static_cast<std::size_t>(cfg.k_neg));
      for (auto& q : negs) q = sampler.draw(neg_rng);
      const SkipgramBatch b = make_batch(std::span(pairs).subspan(s, n), negs, cfg.k_neg);
      nn::zero_grads(params);
      const double loss = batch_loss(b);
      check_finite(loss, what, epoch);
      nn::clip_grad_norm(params, cfg.clip_norm);
      opt.step(params);
      total += loss * static_cast<double>(n);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.loss = total / static_cast<double>(pairs.size());
    WordVectors wv = embed_types();
    if (!wv.vectors().allFinite()) throw NumericError("non_finite_embedding", std::string(what) + " produced non-finite embeddings");
    if (!opts.pairs.empty()) m.report = correlation_report(wv, opts.pairs, epoch);
    m.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    log_epoch(what, m);
    res.history.push_back(m);
    if (opts.on_epoch) opts.on_epoch(m, wv);
    if (epoch == cfg.epochs) res.embeddings = std::move(wv);
  }
  return res;
}

}  // namespace

AutoencoderResult train_autoencoder(const SkipgramCorpus& corpus, const ModelConfig& cfg) {
  cfg.validate();
  corpus.lexicon.validate();
  Rng init = make_rng(cfg.seed, "autoencoder.init");
  AutoencoderNet<float> net(corpus.lexicon, cfg, init);
  auto params = net.params();
  nn::Adam<float> opt(params, {cfg.ae_lr});
  Rng shuffle_rng = make_rng(cfg.seed, "autoencoder.shuffle");
  std::vector<int> order = all_items(corpus);
  if (order.empty()) throw DataError("empty_lexicon", "auto-encoder lexicon is empty");
  AutoencoderResult res;
  for (int epoch = 1; epoch <= cfg.ae_epochs; ++epoch) {
    const auto t0 = Clock::now();
    shuffle_in_place(order, shuffle_rng);
    double total = 0.0;
    for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(cfg.ae_batch_size)) {
      const std::size_t n = std::min(static_cast<std::size_t>(cfg.ae_batch_size), order.size() - s);
      nn::zero_grads(params);
      const double loss = net.loss(corpus.lexicon, std::span(order).subspan(s, n), true);
      check_finite(loss, "autoencoder", epoch);
      nn::clip_grad_norm(params, cfg.clip_norm);
      opt.step(params);
      total += loss * static_cast<double>(n);
    }
    res.epoch_loss.push_back(total / static_cast<double>(order.size()));
    log().info("autoencoder epoch {} loss {:.6f} ({:.1f}s)", epoch, res.epoch_loss.back(),
               std::chrono::duration<double>(Clock::now() - t0).count());
  }
  const auto items = all_items(corpus);
  res.item_embeddings = MatrixXdR(static_cast<Eigen::Index>(items.size()), net.encoder().embedding_dim());
  constexpr std::size_t kChunk = 1024;
  for (std::size_t s = 0; s < items.size(); s += kChunk) {
    const std::size_t n = std::min(kChunk, items.size() - s);
    res.item_embeddings.middleRows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) =
        to_double(net.embed(corpus.lexicon, std::span(items).subspan(s, n)));
  }
  res.type_embeddings = pool_by_word(corpus, res.item_embeddings);
  return res;
}

TrainResult train_two_stage(const SkipgramCorpus& corpus, const MatrixXdR& stage1, const ModelConfig& cfg,
                            const TrainOptions& opts) {
  cfg.validate();
  if (stage1.rows() != corpus.lexicon.size()) {
    throw DataError("stage1_coverage", "stage-1 embeddings cover " + std::to_string(stage1.rows()) + " of " +
                                           std::to_string(corpus.lexicon.size()) + " items");
  }
  if (!stage1.allFinite()) throw NumericError("non_finite_input", "stage-1 embeddings are not finite");
  const Mat<float> frozen = stage1.cast<float>();
  Rng init = make_rng(cfg.seed, "two_stage.init");
  TwoStageNet<float> net(static_cast<int>(stage1.cols()), cfg, init);
  const auto items = all_items(corpus);
  return run_skipgram(
      "two-stage", corpus, cfg, opts, net.params(),
      [&](const SkipgramBatch& b) { return static_cast<double>(net.batch_loss(frozen, b, true)); },
      [&] { return pool_by_word(corpus, to_double(net.embed(frozen, items))); });
}

TrainResult train_end_to_end(const SkipgramCorpus& corpus, const ModelConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  corpus.lexicon.validate();
  Rng init = make_rng(cfg.seed, "end_to_end.init");
  auto net = std::make_shared<EndToEndNet<float>>(corpus.lexicon, cfg, init);
  const auto items = all_items(corpus);
  TrainResult res = run_skipgram(
      corpus.lexicon.mode == InputMode::kFrames ? "continuous" : "end-to-end", corpus, cfg, opts, net->params(),
      [&](const SkipgramBatch& b) { return static_cast<double>(net->batch_loss(corpus.lexicon, b, true)); },
      [&] { return pool_by_word(corpus, to_double(net->embed(corpus.lexicon, items))); });
  res.net = std::move(net);
  return res;
}

TrainResult train_continuous_baseline(const SkipgramCorpus& corpus, const ModelConfig& cfg,
                                      const TrainOptions& opts) {
  if (corpus.lexicon.mode != InputMode::kFrames) {
    throw ConfigError("input_mode", "the continuous baseline needs a frame corpus");
  }
  return train_end_to_end(corpus, cfg, opts);
}

Eigen::VectorXd embed_word(const std::string& word, const SkipgramCorpus& corpus, const EndToEndNet<float>& net) {
  const auto id = corpus.vocab.id(word);
  if (!id || corpus.items_of_word[*id].empty()) throw DataError("oov", "word '" + word + "' is out of vocabulary");
  const auto& items = corpus.items_of_word[*id];
  const Mat<float> e = net.embed(corpus.lexicon, items);
  return e.cast<double>().colwise().mean().transpose();
}

void write_metrics_csv(std::span<const EpochMetrics> history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  out << "epoch,loss,r_cosine,r_edit,seconds\n";
  char buf[256];
  for (const auto& m : history) {
    const double rc = m.report ? m.report->r_cosine : std::nan("");
    const double re = m.report ? m.report->r_edit : std::nan("");
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.3f\n", m.epoch, m.loss, rc, re, m.seconds);
    out << buf;
  }
}

}  // namespace deepskip
