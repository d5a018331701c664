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

#include "deepskip/nn/adam.hpp"

#include <cmath>

namespace deepskip::nn {

template <typename T>
Adam<T>::Adam(const ParamList<T>& params, AdamConfig cfg) : cfg_(cfg) {
  for (auto* p : params) {
    m_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
  }
}

template <typename T>
void Adam<T>::step(const ParamList<T>& params) {
  if (params.size() != m_.size()) throw ConfigError("adam_params", "Adam state does not match parameter list");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const T b1 = static_cast<T>(cfg_.beta1);
  const T b2 = static_cast<T>(cfg_.beta2);
  const T lr = static_cast<T>(cfg_.lr);
  const T eps = static_cast<T>(cfg_.eps);
  const T inv_bc1 = static_cast<T>(1.0 / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    if (p.grad.rows() != m_[i].rows() || p.grad.cols() != m_[i].cols()) {
      throw ConfigError("adam_shape", "gradient shape changed for " + p.name);
    }
    m_[i] = b1 * m_[i] + (T(1) - b1) * p.grad;
    v_[i] = b2 * v_[i] + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m_[i].array() * inv_bc1) / ((v_[i].array() * inv_bc2).sqrt() + eps);
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace deepskip::nn
