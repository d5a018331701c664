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

#include <span>
#include <vector>

#include "deepskip/nn/tensor.hpp"

namespace deepskip::nn {

/// Variable-length batch in packed, time-major order. Sequences are sorted
/// by decreasing length (stable), so the sequences still running at step t
/// are always a prefix of the sorted batch and occupy rows
/// [offsets[t], offsets[t] + batch[t]).
class PackedLayout {
 public:
  PackedLayout() = default;
  /// Throws DataError("empty_sequence") for a zero length.
  explicit PackedLayout(std::span<const int> lengths);

  int num_sequences() const { return static_cast<int>(order_.size()); }
  int total_rows() const { return total_; }
  int max_len() const { return static_cast<int>(batch_.size()); }
  int batch(int t) const { return batch_[t]; }
  int offset(int t) const { return offsets_[t]; }
  /// Original index of the i-th sorted sequence.
  int original(int sorted_i) const { return order_[sorted_i]; }
  int length(int sorted_i) const { return lengths_[sorted_i]; }
  int row(int sorted_i, int t) const { return offsets_[t] + sorted_i; }
  /// Row of the last step of sorted sequence i.
  int final_row(int sorted_i) const { return offsets_[lengths_[sorted_i] - 1] + sorted_i; }
  /// Row holding the same sequence at the time-reversed position.
  int mirror(int r) const { return mirror_[r]; }
  const std::vector<int>& mirror_map() const { return mirror_; }

 private:
  std::vector<int> order_;
  std::vector<int> lengths_;
  std::vector<int> offsets_;
  std::vector<int> batch_;
  std::vector<int> mirror_;
  int total_ = 0;
};

/// out.row(r) = in.row(map[r]).
template <typename T>
Mat<T> permute_rows(const Mat<T>& in, const std::vector<int>& map);

/// Parameters of one GRU direction. Gate blocks are packed column-wise in
/// the order [update z | reset r | candidate h]:
///   z = s(x Wz + h Uz + bz), r = s(x Wr + h Ur + br),
///   h~ = tanh(x Wh + (r * h) Uh + bh), h' = (1 - z) * h + z * h~.
template <typename T>
struct GruDirection {
  int input = 0;
  int hidden = 0;
  Param<T> w;  // input x 3H
  Param<T> u;  // H x 3H
  Param<T> b;  // 1 x 3H

  GruDirection() = default;
  GruDirection(const std::string& name, int input, int hidden, Rng& rng);
  ParamList<T> params() { return {&w, &u, &b}; }
};

template <typename T>
struct GruDirCache {
  Mat<T> x;      // packed inputs
  Mat<T> z, r, cand;
  Mat<T> hprev;  // packed previous states
  Mat<T> h;      // packed outputs
};

/// Runs one direction over packed inputs. `h0` (batch(0) x H, sorted
/// order) is the initial state; nullptr means zeros.
template <typename T>
void gru_direction_forward(const GruDirection<T>& p, const PackedLayout& layout, Mat<T> x,
                           const Mat<T>* h0, GruDirCache<T>& cache);

/// Backpropagation through time. `dh` holds dLoss/dh for every packed row
/// and is consumed. Parameter gradients accumulate into p.*.grad.
template <typename T>
void gru_direction_backward(GruDirection<T>& p, const PackedLayout& layout, const GruDirCache<T>& cache,
                            Mat<T>& dh, Mat<T>* dx, Mat<T>* dh0);

struct GruShape {
  int input = 0;
  int hidden = 0;
  int layers = 1;
  bool bidirectional = true;
};

/// Stacked (optionally bidirectional) GRU sequence encoder. The embedding
/// is the concatenation of the top layer's final forward state and final
/// backward state (dimension 2H), or the final forward state alone.
template <typename T>
class GruEncoder {
 public:
  struct Cache {
    const PackedLayout* layout = nullptr;
    std::vector<GruDirCache<T>> fwd;
    std::vector<GruDirCache<T>> bwd;
  };

  GruEncoder() = default;
  GruEncoder(const std::string& name, const GruShape& shape, Rng& rng);

  const GruShape& shape() const { return shape_; }
  int embedding_dim() const { return shape_.bidirectional ? 2 * shape_.hidden : shape_.hidden; }
  ParamList<T> params();

  /// x0: packed layer-0 inputs (layout.total_rows() x input). Returns one
  /// embedding per sequence in original (unsorted) order. `layout` must
  /// outlive the cache.
  Mat<T> forward(const PackedLayout& layout, const Mat<T>& x0, Cache& cache) const;

  /// grad_emb in original order. Returns dLoss/dx0 (packed) and
  /// accumulates parameter gradients.
  Mat<T> backward(const Cache& cache, const Mat<T>& grad_emb);

 private:
  GruShape shape_;
  std::vector<GruDirection<T>> fwd_;
  std::vector<GruDirection<T>> bwd_;
};

}  // namespace deepskip::nn
