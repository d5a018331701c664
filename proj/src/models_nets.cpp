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

#include <unordered_map>

#include "deepskip/models.hpp"
#include "deepskip/sgns.hpp"

namespace deepskip {

using nn::Mat;
using nn::ParamList;

template <typename T>
T sgns_batch_loss(const SkipgramBatch& b, const Mat<T>& pc, const Mat<T>& po, Mat<T>* dpc, Mat<T>* dpo) {
  const int n = b.size();
  if (n == 0) throw DataError("empty_batch", "skipgram batch is empty");
  const T inv = T(1) / static_cast<T>(n);
  if (dpc) dpc->setZero(pc.rows(), pc.cols());
  if (dpo) dpo->setZero(po.rows(), po.cols());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto u = pc.row(b.c[i]);
    const T sp = u.dot(po.row(b.o[i]));
    total += guarded_neg_log_sigmoid(sp);
    if (dpc) {
      const T gp = (sigmoid(sp) - T(1)) * inv;
      dpc->row(b.c[i]) += gp * po.row(b.o[i]);
      dpo->row(b.o[i]) += gp * u;
    }
    for (int j = 0; j < b.k; ++j) {
      const int q = b.neg[static_cast<std::size_t>(i) * b.k + j];
      const T sn = u.dot(po.row(q));
      total += guarded_neg_log_sigmoid(-sn);
      if (dpc) {
        const T gn = sigmoid(sn) * inv;
        dpc->row(b.c[i]) += gn * po.row(q);
        dpo->row(q) += gn * u;
      }
    }
  }
  return static_cast<T>(total / n);
}

template <typename T>
SequenceEncoder<T>::SequenceEncoder(const std::string& name, const SequenceLexicon& lex, const ModelConfig& cfg,
                                    Rng& rng)
    : mode_(lex.mode) {
  int in = 0;
  if (lex.mode == InputMode::kFrames) {
    if (lex.frame_dim < 1) throw ConfigError("frame_dim", "frame lexicon has no feature dimension");
    in = lex.frame_dim;
  } else {
    if (lex.alphabet < 1) throw ConfigError("alphabet", "lexicon alphabet is empty");
    in = cfg.input_embedding_dim();
    has_table_ = true;
    table_ = nn::Param<T>(name + ".table", lex.alphabet, in);
    nn::xavier_uniform(table_.value, lex.alphabet, in, rng);
  }
  gru_ = nn::GruEncoder<T>(name + ".gru", {in, cfg.hidden(), cfg.gru_layers(), true}, rng);
}

template <typename T>
ParamList<T> SequenceEncoder<T>::params() {
  ParamList<T> out;
  if (has_table_) out.push_back(&table_);
  for (auto* p : gru_.params()) out.push_back(p);
  return out;
}

template <typename T>
Mat<T> SequenceEncoder<T>::forward(const SequenceLexicon& lex, std::span<const int> items, Cache& cache) const {
  if (lex.mode != mode_) throw ConfigError("input_mode", "lexicon mode does not match the encoder");
  if (has_table_ && lex.alphabet > table_.value.rows()) {
    throw DataError("id_out_of_range", "lexicon alphabet exceeds the encoder's id table");
  }
  cache.items.assign(items.begin(), items.end());
  std::vector<int> lengths;
  lengths.reserve(items.size());
  for (int it : items) lengths.push_back(lex.length(it));
  cache.layout = std::make_unique<nn::PackedLayout>(lengths);
  const auto& lay = *cache.layout;
  if (items.empty()) return Mat<T>(0, embedding_dim());
  Mat<T> x0(lay.total_rows(), input_dim());
  for (int i = 0; i < lay.num_sequences(); ++i) {
    const int item = items[lay.original(i)];
    for (int t = 0; t < lay.length(i); ++t) {
      if (has_table_) {
        x0.row(lay.row(i, t)) = table_.value.row(lex.ids[item][t]);
      } else {
        x0.row(lay.row(i, t)) = lex.frames[item].row(t).template cast<T>();
      }
    }
  }
  return gru_.forward(lay, x0, cache.gru);
}

template <typename T>
Mat<T> SequenceEncoder<T>::forward(const SequenceLexicon& lex, std::span<const int> items) const {
  Cache c;
  return forward(lex, items, c);
}

template <typename T>
void SequenceEncoder<T>::backward(const SequenceLexicon& lex, const Cache& cache, const Mat<T>& grad) {
  if (cache.items.empty()) return;
  Mat<T> dx0 = gru_.backward(cache.gru, grad);
  if (!has_table_) return;
  const auto& lay = *cache.layout;
  for (int i = 0; i < lay.num_sequences(); ++i) {
    const int item = cache.items[lay.original(i)];
    for (int t = 0; t < lay.length(i); ++t) table_.grad.row(lex.ids[item][t]) += dx0.row(lay.row(i, t));
  }
}

template <typename T>
AutoencoderNet<T>::AutoencoderNet(const SequenceLexicon& lex, const ModelConfig& cfg, Rng& rng) {
  if (lex.mode == InputMode::kFrames) {
    throw ConfigError("input_mode", "the auto-encoder reconstructs id sequences (chars or units)");
  }
  alphabet_ = lex.alphabet;
  enc_ = SequenceEncoder<T>("ae.enc", lex, cfg, rng);
  const int e = enc_.embedding_dim();
  const int din = cfg.input_embedding_dim();
  dec_table_ = nn::Param<T>("ae.dec.table", alphabet_ + 1, din);
  nn::xavier_uniform(dec_table_.value, alphabet_ + 1, din, rng);
  dec_ = nn::GruDirection<T>("ae.dec.gru", din, e, rng);
  out_w_ = nn::Param<T>("ae.out.w", e, alphabet_ + 1);
  nn::xavier_uniform(out_w_.value, e, alphabet_ + 1, rng);
  out_b_ = nn::Param<T>("ae.out.b", 1, alphabet_ + 1);
}

template <typename T>
ParamList<T> AutoencoderNet<T>::params() {
  ParamList<T> out = enc_.params();
  out.push_back(&dec_table_);
  for (auto* p : dec_.params()) out.push_back(p);
  out.push_back(&out_w_);
  out.push_back(&out_b_);
  return out;
}

template <typename T>
T AutoencoderNet<T>::loss(const SequenceLexicon& lex, std::span<const int> items, bool backward) {
  typename SequenceEncoder<T>::Cache ec;
  const Mat<T> emb = enc_.forward(lex, items, ec);
  std::vector<int> lengths;
  for (int it : items) lengths.push_back(lex.length(it) + 1);
  const nn::PackedLayout dl(lengths);
  const int a = alphabet_;
  Mat<T> x(dl.total_rows(), dec_table_.value.cols());
  std::vector<int> target(static_cast<std::size_t>(dl.total_rows()));
  std::vector<int> input(static_cast<std::size_t>(dl.total_rows()));
  for (int i = 0; i < dl.num_sequences(); ++i) {
    const auto& seq = lex.ids[items[dl.original(i)]];
    const int len = static_cast<int>(seq.size());
    for (int t = 0; t <= len; ++t) {
      const int r = dl.row(i, t);
      input[r] = t == 0 ? a : seq[t - 1];
      target[r] = t == len ? a : seq[t];
      x.row(r) = dec_table_.value.row(input[r]);
    }
  }
  Mat<T> h0(dl.num_sequences(), emb.cols());
  for (int i = 0; i < dl.num_sequences(); ++i) h0.row(i) = emb.row(dl.original(i));
  nn::GruDirCache<T> dc;
  nn::gru_direction_forward<T>(dec_, dl, std::move(x), &h0, dc);
  Mat<T> logits = dc.h * out_w_.value;
  logits.rowwise() += out_b_.value.row(0);
  const int n = dl.total_rows();
  double total = 0.0;
  Mat<T> prob(n, a + 1);
  for (int r = 0; r < n; ++r) {
    const T mx = logits.row(r).maxCoeff();
    prob.row(r) = (logits.row(r).array() - mx).exp().matrix();
    const T z = prob.row(r).sum();
    prob.row(r) /= z;
    total += -(static_cast<double>(logits(r, target[r]) - mx) - std::log(static_cast<double>(z)));
  }
  if (backward) {
    Mat<T>& d = prob;
    for (int r = 0; r < n; ++r) d(r, target[r]) -= T(1);
    d /= static_cast<T>(n);
    out_w_.grad.noalias() += dc.h.transpose() * d;
    out_b_.grad.row(0) += d.colwise().sum();
    Mat<T> dh = d * out_w_.value.transpose();
    Mat<T> dx, dh0;
    nn::gru_direction_backward<T>(dec_, dl, dc, dh, &dx, &dh0);
    for (int r = 0; r < n; ++r) dec_table_.grad.row(input[r]) += dx.row(r);
    Mat<T> gemb(emb.rows(), emb.cols());
    for (int i = 0; i < dl.num_sequences(); ++i) gemb.row(dl.original(i)) = dh0.row(i);
    enc_.backward(lex, ec, gemb);
  }
  return static_cast<T>(total / n);
}

template <typename T>
Mat<T> AutoencoderNet<T>::embed(const SequenceLexicon& lex, std::span<const int> items) const {
  return enc_.forward(lex, items);
}

namespace {

std::vector<int> stack_dims(int in, const ModelConfig& cfg) {
  std::vector<int> dims{in};
  for (int l = 0; l < cfg.linear_layers(); ++l) dims.push_back(cfg.embedding_dim());
  return dims;
}

template <typename T>
Mat<T> gather_rows(const Mat<T>& src, std::span<const int> rows) {
  Mat<T> out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
  return out;
}

}  // namespace

template <typename T>
EndToEndNet<T>::EndToEndNet(const SequenceLexicon& lex, const ModelConfig& cfg, Rng& rng) : tied_(cfg.tied_encoder) {
  enc_ = SequenceEncoder<T>("enc", lex, cfg, rng);
  if (!tied_) ctx_enc_ = SequenceEncoder<T>("ctx_enc", lex, cfg, rng);
  center_ = nn::LinearStack<T>("center", stack_dims(enc_.embedding_dim(), cfg), cfg.relu, rng);
  context_ = nn::LinearStack<T>("context", stack_dims(enc_.embedding_dim(), cfg), cfg.relu, rng);
}

template <typename T>
ParamList<T> EndToEndNet<T>::params() {
  ParamList<T> out = enc_.params();
  if (!tied_)
    for (auto* p : ctx_enc_.params()) out.push_back(p);
  for (auto* p : center_.params()) out.push_back(p);
  for (auto* p : context_.params()) out.push_back(p);
  return out;
}

template <typename T>
T EndToEndNet<T>::batch_loss(const SequenceLexicon& lex, const SkipgramBatch& b, bool backward) {
  Mat<T> ec, eo;
  typename SequenceEncoder<T>::Cache cache, ctx_cache;
  std::vector<int> cpos, opos;  // rows of the shared encoding
  if (tied_) {
    std::vector<int> all;
    std::unordered_map<int, int> where;
    auto add = [&](int item) {
      auto [it, fresh] = where.try_emplace(item, static_cast<int>(all.size()));
      if (fresh) all.push_back(item);
      return it->second;
    };
    for (int it : b.center_items) cpos.push_back(add(it));
    for (int it : b.context_items) opos.push_back(add(it));
    const Mat<T> e = enc_.forward(lex, all, cache);
    ec = gather_rows(e, cpos);
    eo = gather_rows(e, opos);
  } else {
    ec = enc_.forward(lex, b.center_items, cache);
    eo = ctx_enc_.forward(lex, b.context_items, ctx_cache);
  }
  typename nn::LinearStack<T>::Cache lc, lo;
  const Mat<T> pc = center_.forward(ec, lc);
  const Mat<T> po = context_.forward(eo, lo);
  if (!backward) return sgns_batch_loss<T>(b, pc, po, nullptr, nullptr);
  Mat<T> dpc, dpo;
  const T loss = sgns_batch_loss<T>(b, pc, po, &dpc, &dpo);
  const Mat<T> dec = center_.backward(lc, dpc);
  const Mat<T> deo = context_.backward(lo, dpo);
  if (tied_) {
    Mat<T> g = Mat<T>::Zero(static_cast<Eigen::Index>(cache.items.size()), dec.cols());
    for (std::size_t i = 0; i < cpos.size(); ++i) g.row(cpos[i]) += dec.row(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < opos.size(); ++i) g.row(opos[i]) += deo.row(static_cast<Eigen::Index>(i));
    enc_.backward(lex, cache, g);
  } else {
    enc_.backward(lex, cache, dec);
    ctx_enc_.backward(lex, ctx_cache, deo);
  }
  return loss;
}

template <typename T>
Mat<T> EndToEndNet<T>::embed(const SequenceLexicon& lex, std::span<const int> items) const {
  constexpr std::size_t kChunk = 1024;
  Mat<T> out(static_cast<Eigen::Index>(items.size()), center_.out_dim());
  for (std::size_t s = 0; s < items.size(); s += kChunk) {
    const std::size_t n = std::min(kChunk, items.size() - s);
    out.middleRows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) =
        center_.forward(enc_.forward(lex, items.subspan(s, n)));
  }
  return out;
}

template <typename T>
TwoStageNet<T>::TwoStageNet(int input_dim, const ModelConfig& cfg, Rng& rng) {
  center_ = nn::LinearStack<T>("center", stack_dims(input_dim, cfg), cfg.relu, rng);
  context_ = nn::LinearStack<T>("context", stack_dims(input_dim, cfg), cfg.relu, rng);
}

template <typename T>
ParamList<T> TwoStageNet<T>::params() {
  ParamList<T> out = center_.params();
  for (auto* p : context_.params()) out.push_back(p);
  return out;
}

template <typename T>
T TwoStageNet<T>::batch_loss(const Mat<T>& stage1, const SkipgramBatch& b, bool backward) {
  typename nn::LinearStack<T>::Cache lc, lo;
  const Mat<T> pc = center_.forward(gather_rows(stage1, b.center_items), lc);
  const Mat<T> po = context_.forward(gather_rows(stage1, b.context_items), lo);
  if (!backward) return sgns_batch_loss<T>(b, pc, po, nullptr, nullptr);
  Mat<T> dpc, dpo;
  const T loss = sgns_batch_loss<T>(b, pc, po, &dpc, &dpo);
  center_.backward(lc, dpc);
  context_.backward(lo, dpo);
  return loss;
}

template <typename T>
Mat<T> TwoStageNet<T>::embed(const Mat<T>& stage1, std::span<const int> items) const {
  return center_.forward(gather_rows(stage1, items));
}

#define DEEPSKIP_INSTANTIATE_MODELS(T)                                                                  \
  template T sgns_batch_loss<T>(const SkipgramBatch&, const Mat<T>&, const Mat<T>&, Mat<T>*, Mat<T>*); \
  template class SequenceEncoder<T>;                                                                    \
  template class AutoencoderNet<T>;                                                                     \
  template class EndToEndNet<T>;                                                                        \
  template class TwoStageNet<T>;

DEEPSKIP_INSTANTIATE_MODELS(float)
DEEPSKIP_INSTANTIATE_MODELS(double)

}  // namespace deepskip
