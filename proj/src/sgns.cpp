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

#include "deepskip/sgns.hpp"

#include <algorithm>
#include <cmath>

#include "deepskip/common.hpp"
#include "deepskip/log.hpp"

namespace deepskip {

void BaselineConfig::validate() const {
  if (dim < 1) throw ConfigError("dim", "dim must be >= 1");
  if (window < 1) throw ConfigError("window", "window must be >= 1");
  if (k_neg < 1) throw ConfigError("k_neg", "k_neg must be >= 1");
  if (epochs < 1) throw ConfigError("epochs", "epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr", "lr must be > 0");
}

BaselineResult train_baseline(std::span<const Sentence> corpus, const Vocabulary& vocab,
                              const BaselineConfig& cfg, const EpochLogger& on_epoch) {
  cfg.validate();
  const int v = vocab.size();
  const int d = cfg.dim;

  BaselineResult res;
  auto& tab = res.table;
  tab.center.resize(v, d);
  tab.context = MatrixXdR::Zero(v, d);
  auto init_rng = make_rng(cfg.seed, "baseline-init");
  for (Eigen::Index i = 0; i < tab.center.size(); ++i) {
    tab.center.data()[i] = (uniform01(init_rng) - 0.5) / d;
  }

  std::vector<std::vector<int>> encoded;
  std::vector<std::vector<std::pair<int, int>>> windows;
  std::size_t pairs_per_epoch = 0;
  for (const auto& s : corpus) {
    encoded.push_back(vocab.encode(s));
    windows.push_back(window_positions(encoded.back(), cfg.window));
    pairs_per_epoch += windows.back().size();
  }
  if (pairs_per_epoch == 0) throw DataError("no_windows", "corpus yields no training pairs");

  NegativeSampler sampler(vocab.counts(), cfg.neg_power);
  auto neg_rng = make_rng(cfg.seed, "baseline-negatives");
  const double total = static_cast<double>(pairs_per_epoch) * cfg.epochs;
  double processed = 0.0;

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> negs(cfg.k_neg, d);
  std::vector<int> neg_ids(static_cast<std::size_t>(cfg.k_neg));
  SgnsGrad<double> grad;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < encoded.size(); ++s) {
      const auto& ids = encoded[s];
      for (auto [i, j] : windows[s]) {
        const double lr = cfg.lr * std::max(1e-4, 1.0 - processed / total);
        processed += 1.0;
        const int c = ids[i];
        const int o = ids[j];
        for (int n = 0; n < cfg.k_neg; ++n) {
          neg_ids[n] = sampler.draw(neg_rng);
          negs.row(n) = tab.context.row(neg_ids[n]);
        }
        const double loss = sgns_loss<double>(tab.center.row(c), tab.context.row(o), negs, grad);
        if (!std::isfinite(loss)) {
          throw NumericError("non_finite_loss",
                             "baseline loss became non-finite at epoch " + std::to_string(epoch) +
                                 "; lower the learning rate or check the corpus");
        }
        loss_sum += loss;
        tab.center.row(c) -= lr * grad.u;
        tab.context.row(o) -= lr * grad.pos;
        for (int n = 0; n < cfg.k_neg; ++n) tab.context.row(neg_ids[n]) -= lr * grad.negs.row(n);
      }
    }
    const double mean = loss_sum / static_cast<double>(pairs_per_epoch);
    res.epoch_loss.push_back(mean);
    log().info("baseline epoch {} loss {:.6f}", epoch, mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  if (!tab.center.allFinite()) throw NumericError("non_finite_params", "baseline vectors are not finite");
  return res;
}

WordVectors export_center_vectors(const EmbeddingTable& table, const Vocabulary& vocab) {
  return WordVectors(vocab.words(), table.center);
}

}  // namespace deepskip
