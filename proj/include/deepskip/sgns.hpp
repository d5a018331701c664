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
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "deepskip/corpus.hpp"
#include "deepskip/embeddings.hpp"

namespace deepskip {

/// Probabilities are clamped to [kSigmoidFloor, 1 - kSigmoidFloor] before
/// taking logs. Gradients use the unclamped sigmoid.
inline constexpr double kSigmoidFloor = 1e-7;

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
inline T guarded_neg_log_sigmoid(T x) {
  const double p = std::clamp(static_cast<double>(sigmoid(x)), kSigmoidFloor, 1.0 - kSigmoidFloor);
  return static_cast<T>(-std::log(p));
}

template <typename T>
struct SgnsGrad {
  Eigen::Matrix<T, 1, Eigen::Dynamic> u;
  Eigen::Matrix<T, 1, Eigen::Dynamic> pos;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> negs;  // k x D
};

/// loss = -log s(u.v_pos) - sum_i log s(-u.v_neg_i), with exact gradients
/// written into `grad`. `v_negs` holds one negative per row.
template <typename T>
T sgns_loss(const Eigen::Ref<const Eigen::Matrix<T, 1, Eigen::Dynamic>>& u,
            const Eigen::Ref<const Eigen::Matrix<T, 1, Eigen::Dynamic>>& v_pos,
            const Eigen::Ref<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>& v_negs,
            SgnsGrad<T>& grad) {
  const T sp = u.dot(v_pos);
  T loss = guarded_neg_log_sigmoid(sp);
  const T gp = sigmoid(sp) - T(1);
  grad.pos = gp * u;
  grad.u = gp * v_pos;
  grad.negs.resize(v_negs.rows(), v_negs.cols());
  for (Eigen::Index i = 0; i < v_negs.rows(); ++i) {
    const T sn = u.dot(v_negs.row(i));
    loss += guarded_neg_log_sigmoid(-sn);
    const T gn = sigmoid(sn);
    grad.negs.row(i) = gn * u;
    grad.u += gn * v_negs.row(i);
  }
  return loss;
}

struct BaselineConfig {
  int dim = 100;
  int window = 5;
  int k_neg = 10;
  int epochs = 5;
  double lr = 0.025;
  double neg_power = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Lookup-table SGNS parameters: centre ("input") and context ("output")
/// vectors, one row per vocabulary id.
struct EmbeddingTable {
  MatrixXdR center;
  MatrixXdR context;

  int dim() const { return static_cast<int>(center.cols()); }
};

struct BaselineResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean per-sample loss
};

using EpochLogger = std::function<void(int epoch, double mean_loss)>;

/// Single-worker SGD over every window pair in corpus order with a
/// linearly decaying learning rate. Bit-deterministic for a given seed.
BaselineResult train_baseline(std::span<const Sentence> corpus, const Vocabulary& vocab,
                              const BaselineConfig& cfg, const EpochLogger& on_epoch = {});

WordVectors export_center_vectors(const EmbeddingTable& table, const Vocabulary& vocab);

}  // namespace deepskip
