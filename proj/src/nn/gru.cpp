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

#include "deepskip/nn/gru.hpp"

#include <algorithm>
#include <numeric>

namespace deepskip::nn {
namespace {

template <typename Derived>
auto sigmoid_of(const Eigen::MatrixBase<Derived>& x) {
  using T = typename Derived::Scalar;
  return (T(1) / (T(1) + (-x.array()).exp())).matrix();
}

}  // namespace

PackedLayout::PackedLayout(std::span<const int> lengths) {
  const int n = static_cast<int>(lengths.size());
  order_.resize(static_cast<std::size_t>(n));
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return lengths[a] > lengths[b]; });
  lengths_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    lengths_[k] = lengths[order_[k]];
    if (lengths_[k] < 1) throw DataError("empty_sequence", "sequence encoder needs length >= 1");
  }
  const int max_len = n > 0 ? lengths_[0] : 0;
  batch_.assign(static_cast<std::size_t>(max_len), 0);
  offsets_.assign(static_cast<std::size_t>(max_len), 0);
  for (int k = 0; k < n; ++k)
    for (int t = 0; t < lengths_[k]; ++t) ++batch_[t];
  for (int t = 1; t < max_len; ++t) offsets_[t] = offsets_[t - 1] + batch_[t - 1];
  total_ = max_len > 0 ? offsets_.back() + batch_.back() : 0;
  mirror_.assign(static_cast<std::size_t>(total_), 0);
  for (int k = 0; k < n; ++k) {
    for (int t = 0; t < lengths_[k]; ++t) mirror_[offsets_[t] + k] = offsets_[lengths_[k] - 1 - t] + k;
  }
}

template <typename T>
Mat<T> permute_rows(const Mat<T>& in, const std::vector<int>& map) {
  Mat<T> out(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) out.row(r) = in.row(map[r]);
  return out;
}

template <typename T>
GruDirection<T>::GruDirection(const std::string& name, int input_dim, int hidden_dim, Rng& rng)
    : input(input_dim),
      hidden(hidden_dim),
      w(name + ".w", input_dim, 3 * hidden_dim),
      u(name + ".u", hidden_dim, 3 * hidden_dim),
      b(name + ".b", 1, 3 * hidden_dim) {
  xavier_uniform(w.value, input_dim, hidden_dim, rng);
  xavier_uniform(u.value, hidden_dim, hidden_dim, rng);
}

template <typename T>
void gru_direction_forward(const GruDirection<T>& p, const PackedLayout& layout, Mat<T> x,
                           const Mat<T>* h0, GruDirCache<T>& c) {
  const int H = p.hidden;
  const int total = layout.total_rows();
  if (x.cols() != p.input || x.rows() != total) {
    throw DataError("dimension_mismatch", "GRU input is " + std::to_string(x.cols()) + " wide, expected " +
                                              std::to_string(p.input));
  }
  c.x = std::move(x);
  Mat<T> a = c.x * p.w.value;
  a.rowwise() += p.b.value.row(0);
  c.z.resize(total, H);
  c.r.resize(total, H);
  c.cand.resize(total, H);
  c.hprev.resize(total, H);
  c.h.resize(total, H);
  const auto uzr = p.u.value.leftCols(2 * H);
  const auto uh = p.u.value.rightCols(H);
  Mat<T> gzr, rh;
  for (int t = 0; t < layout.max_len(); ++t) {
    const int n = layout.batch(t);
    const int off = layout.offset(t);
    auto hp = c.hprev.middleRows(off, n);
    if (t == 0) {
      if (h0) {
        hp = h0->topRows(n);
      } else {
        hp.setZero();
      }
    } else {
      hp = c.h.middleRows(layout.offset(t - 1), n);
    }
    gzr.noalias() = hp * uzr;
    gzr += a.block(off, 0, n, 2 * H);
    c.z.middleRows(off, n) = sigmoid_of(gzr.leftCols(H));
    c.r.middleRows(off, n) = sigmoid_of(gzr.rightCols(H));
    rh = c.r.middleRows(off, n).cwiseProduct(hp);
    Mat<T> pre = a.block(off, 2 * H, n, H);
    pre.noalias() += rh * uh;
    c.cand.middleRows(off, n) = pre.array().tanh().matrix();
    c.h.middleRows(off, n) =
        hp + c.z.middleRows(off, n).cwiseProduct(c.cand.middleRows(off, n) - hp);
  }
}

template <typename T>
void gru_direction_backward(GruDirection<T>& p, const PackedLayout& layout, const GruDirCache<T>& c,
                            Mat<T>& dh, Mat<T>* dx, Mat<T>* dh0) {
  const int H = p.hidden;
  const int total = layout.total_rows();
  Mat<T> da(total, 3 * H);
  const auto uzr = p.u.value.leftCols(2 * H);
  const auto uh = p.u.value.rightCols(H);
  Mat<T> dhp, drh, dz, dah;
  for (int t = layout.max_len() - 1; t >= 0; --t) {
    const int n = layout.batch(t);
    const int off = layout.offset(t);
    const auto dhb = dh.middleRows(off, n);
    const auto hp = c.hprev.middleRows(off, n);
    const auto z = c.z.middleRows(off, n);
    const auto r = c.r.middleRows(off, n);
    const auto cand = c.cand.middleRows(off, n);

    dz = dhb.cwiseProduct(cand - hp);
    dah = dhb.cwiseProduct(z).cwiseProduct((T(1) - cand.array().square()).matrix());
    dhp = dhb - dhb.cwiseProduct(z);
    drh.noalias() = dah * uh.transpose();
    dhp += drh.cwiseProduct(r);
    da.block(off, 0, n, H) = dz.cwiseProduct(z).cwiseProduct((T(1) - z.array()).matrix());
    da.block(off, H, n, H) = drh.cwiseProduct(hp).cwiseProduct(r).cwiseProduct((T(1) - r.array()).matrix());
    da.block(off, 2 * H, n, H) = dah;
    dhp.noalias() += da.block(off, 0, n, 2 * H) * uzr.transpose();
    if (t > 0) {
      dh.middleRows(layout.offset(t - 1), n) += dhp;
    } else if (dh0) {
      *dh0 = dhp;
    }
  }
  p.w.grad.noalias() += c.x.transpose() * da;
  p.b.grad.row(0) += da.colwise().sum();
  p.u.grad.leftCols(2 * H).noalias() += c.hprev.transpose() * da.leftCols(2 * H);
  const Mat<T> rh = c.r.cwiseProduct(c.hprev);
  p.u.grad.rightCols(H).noalias() += rh.transpose() * da.rightCols(H);
  if (dx) *dx = da * p.w.value.transpose();
}

template <typename T>
GruEncoder<T>::GruEncoder(const std::string& name, const GruShape& shape, Rng& rng) : shape_(shape) {
  if (shape.layers < 1 || shape.hidden < 1 || shape.input < 1) {
    throw ConfigError("gru_shape", "GRU needs layers, hidden and input >= 1");
  }
  const int dirs = shape.bidirectional ? 2 : 1;
  for (int l = 0; l < shape.layers; ++l) {
    const int in = l == 0 ? shape.input : dirs * shape.hidden;
    fwd_.emplace_back(name + ".l" + std::to_string(l) + ".fwd", in, shape.hidden, rng);
    if (shape.bidirectional) bwd_.emplace_back(name + ".l" + std::to_string(l) + ".bwd", in, shape.hidden, rng);
  }
}

template <typename T>
ParamList<T> GruEncoder<T>::params() {
  ParamList<T> out;
  for (std::size_t l = 0; l < fwd_.size(); ++l) {
    for (auto* p : fwd_[l].params()) out.push_back(p);
    if (shape_.bidirectional)
      for (auto* p : bwd_[l].params()) out.push_back(p);
  }
  return out;
}

template <typename T>
Mat<T> GruEncoder<T>::forward(const PackedLayout& layout, const Mat<T>& x0, Cache& cache) const {
  if (x0.cols() != shape_.input || x0.rows() != layout.total_rows()) {
    throw DataError("dimension_mismatch", "GRU input is " + std::to_string(x0.rows()) + "x" +
                                              std::to_string(x0.cols()) + ", expected " +
                                              std::to_string(layout.total_rows()) + "x" + std::to_string(shape_.input));
  }
  const int L = shape_.layers;
  const int H = shape_.hidden;
  cache.layout = &layout;
  cache.fwd.resize(static_cast<std::size_t>(L));
  cache.bwd.resize(shape_.bidirectional ? static_cast<std::size_t>(L) : 0);
  Mat<T> x = x0;
  for (int l = 0; l < L; ++l) {
    if (shape_.bidirectional) {
      gru_direction_forward<T>(bwd_[l], layout, permute_rows(x, layout.mirror_map()), nullptr, cache.bwd[l]);
    }
    gru_direction_forward<T>(fwd_[l], layout, std::move(x), nullptr, cache.fwd[l]);
    if (l + 1 < L) {
      if (shape_.bidirectional) {
        x.resize(layout.total_rows(), 2 * H);
        x.leftCols(H) = cache.fwd[l].h;
        x.rightCols(H) = permute_rows(cache.bwd[l].h, layout.mirror_map());
      } else {
        x = cache.fwd[l].h;
      }
    }
  }
  Mat<T> emb(layout.num_sequences(), embedding_dim());
  for (int i = 0; i < layout.num_sequences(); ++i) {
    const int fr = layout.final_row(i);
    const int orig = layout.original(i);
    emb.row(orig).leftCols(H) = cache.fwd[L - 1].h.row(fr);
    if (shape_.bidirectional) emb.row(orig).rightCols(H) = cache.bwd[L - 1].h.row(fr);
  }
  return emb;
}

template <typename T>
Mat<T> GruEncoder<T>::backward(const Cache& cache, const Mat<T>& grad_emb) {
  const PackedLayout& layout = *cache.layout;
  const int L = shape_.layers;
  const int H = shape_.hidden;
  Mat<T> dhf = Mat<T>::Zero(layout.total_rows(), H);
  Mat<T> dhb;
  if (shape_.bidirectional) dhb = Mat<T>::Zero(layout.total_rows(), H);
  for (int i = 0; i < layout.num_sequences(); ++i) {
    const int fr = layout.final_row(i);
    const int orig = layout.original(i);
    dhf.row(fr) = grad_emb.row(orig).leftCols(H);
    if (shape_.bidirectional) dhb.row(fr) = grad_emb.row(orig).rightCols(H);
  }
  for (int l = L - 1; l >= 0; --l) {
    Mat<T> dx;
    gru_direction_backward<T>(fwd_[l], layout, cache.fwd[l], dhf, &dx, nullptr);
    if (shape_.bidirectional) {
      Mat<T> dxb;
      gru_direction_backward<T>(bwd_[l], layout, cache.bwd[l], dhb, &dxb, nullptr);
      dx += permute_rows(dxb, layout.mirror_map());
    }
    if (l == 0) return dx;
    if (shape_.bidirectional) {
      dhf = dx.leftCols(H);
      Mat<T> right = dx.rightCols(H);
      dhb = permute_rows(right, layout.mirror_map());
    } else {
      dhf = std::move(dx);
    }
  }
  return {};
}

#define DEEPSKIP_INSTANTIATE_GRU(T)                                                                        \
  template Mat<T> permute_rows<T>(const Mat<T>&, const std::vector<int>&);                                 \
  template struct GruDirection<T>;                                                                         \
  template void gru_direction_forward<T>(const GruDirection<T>&, const PackedLayout&, Mat<T>, const Mat<T>*, \
                                         GruDirCache<T>&);                                                 \
  template void gru_direction_backward<T>(GruDirection<T>&, const PackedLayout&, const GruDirCache<T>&,    \
                                          Mat<T>&, Mat<T>*, Mat<T>*);                                      \
  template class GruEncoder<T>;

DEEPSKIP_INSTANTIATE_GRU(float)
DEEPSKIP_INSTANTIATE_GRU(double)

}  // namespace deepskip::nn
