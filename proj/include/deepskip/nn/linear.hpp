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

#include <string>
#include <vector>

#include "deepskip/nn/tensor.hpp"

namespace deepskip::nn {

/// y = W_P(...(W_1 x + b_1)...) + b_P on row-vector batches. With
/// `relu` set, a ReLU follows every layer but the last.
template <typename T>
class LinearStack {
 public:
  struct Cache {
    std::vector<Mat<T>> inputs;  // input of each layer (post-activation)
    std::vector<Mat<T>> pre;     // pre-activation outputs, used by ReLU
  };

  LinearStack() = default;
  /// dims = {in, h1, ..., out}; depth = dims.size() - 1 >= 1.
  LinearStack(const std::string& name, const std::vector<int>& dims, bool relu, Rng& rng);

  int depth() const { return static_cast<int>(w_.size()); }
  int in_dim() const { return static_cast<int>(w_.front().value.rows()); }
  int out_dim() const { return static_cast<int>(w_.back().value.cols()); }
  ParamList<T> params();

  Mat<T> forward(const Mat<T>& x, Cache& cache) const;
  Mat<T> forward(const Mat<T>& x) const;
  /// Accumulates parameter gradients; returns dLoss/dx.
  Mat<T> backward(const Cache& cache, const Mat<T>& dy);

  Param<T>& weight(int i) { return w_[i]; }
  Param<T>& bias(int i) { return b_[i]; }

 private:
  std::vector<Param<T>> w_;  // in x out
  std::vector<Param<T>> b_;  // 1 x out
  bool relu_ = false;
};

}  // namespace deepskip::nn
