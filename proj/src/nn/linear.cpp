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

#include "deepskip/nn/linear.hpp"

namespace deepskip::nn {

template <typename T>
LinearStack<T>::LinearStack(const std::string& name, const std::vector<int>& dims, bool relu, Rng& rng)
    : relu_(relu) {
  if (dims.size() < 2) throw ConfigError("linear_depth", "linear stack needs at least one layer");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i] < 1 || dims[i + 1] < 1) throw ConfigError("linear_dims", "linear layer sizes must be >= 1");
    w_.emplace_back(name + "." + std::to_string(i) + ".w", dims[i], dims[i + 1]);
    b_.emplace_back(name + "." + std::to_string(i) + ".b", 1, dims[i + 1]);
    xavier_uniform(w_.back().value, dims[i], dims[i + 1], rng);
  }
}

template <typename T>
ParamList<T> LinearStack<T>::params() {
  ParamList<T> out;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    out.push_back(&w_[i]);
    out.push_back(&b_[i]);
  }
  return out;
}

template <typename T>
Mat<T> LinearStack<T>::forward(const Mat<T>& x, Cache& cache) const {
  if (x.cols() != in_dim()) {
    throw DataError("dimension_mismatch", "linear stack input is " + std::to_string(x.cols()) +
                                              " wide, expected " + std::to_string(in_dim()));
  }
  cache.inputs.clear();
  cache.pre.clear();
  Mat<T> h = x;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    cache.inputs.push_back(h);
    Mat<T> y = h * w_[i].value;
    y.rowwise() += b_[i].value.row(0);
    const bool last = i + 1 == w_.size();
    if (relu_ && !last) {
      cache.pre.push_back(y);
      h = y.cwiseMax(T(0));
    } else {
      cache.pre.emplace_back();
      h = std::move(y);
    }
  }
  return h;
}

template <typename T>
Mat<T> LinearStack<T>::forward(const Mat<T>& x) const {
  Cache c;
  return forward(x, c);
}

template <typename T>
Mat<T> LinearStack<T>::backward(const Cache& cache, const Mat<T>& dy) {
  Mat<T> g = dy;
  for (int i = depth() - 1; i >= 0; --i) {
    const bool last = i + 1 == depth();
    if (relu_ && !last) g = g.cwiseProduct((cache.pre[i].array() > T(0)).template cast<T>().matrix());
    w_[i].grad.noalias() += cache.inputs[i].transpose() * g;
    b_[i].grad.row(0) += g.colwise().sum();
    g = g * w_[i].value.transpose();
  }
  return g;
}

template class LinearStack<float>;
template class LinearStack<double>;

}  // namespace deepskip::nn
