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
#include <string>
#include <vector>

#include "deepskip/common.hpp"

namespace deepskip::nn {

/// Dense row-major matrix. Training runs in float, gradient checks in double.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

/// A named trainable matrix and its accumulated gradient.
template <typename T>
struct Param {
  std::string name;
  Mat<T> value;
  Mat<T> grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Mat<T>::Zero(rows, cols)), grad(Mat<T>::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

template <typename T>
using ParamList = std::vector<Param<T>*>;

/// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void xavier_uniform(Mat<T>& m, int fan_in, int fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>((2.0 * uniform01(rng) - 1.0) * a);
}

template <typename T>
void zero_grads(const ParamList<T>& ps) {
  for (auto* p : ps) p->zero_grad();
}

template <typename T>
double global_grad_norm(const ParamList<T>& ps) {
  double s = 0.0;
  for (auto* p : ps) s += p->grad.template cast<double>().squaredNorm();
  return std::sqrt(s);
}

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(const ParamList<T>& ps, double max_norm) {
  const double n = global_grad_norm(ps);
  if (max_norm > 0.0 && n > max_norm) {
    const T scale = static_cast<T>(max_norm / n);
    for (auto* p : ps) p->grad *= scale;
  }
  return n;
}

template <typename T>
bool all_finite(const ParamList<T>& ps) {
  for (auto* p : ps)
    if (!p->value.allFinite()) return false;
  return true;
}

template <typename T>
long count_params(const ParamList<T>& ps) {
  long n = 0;
  for (auto* p : ps) n += static_cast<long>(p->size());
  return n;
}

}  // namespace deepskip::nn
