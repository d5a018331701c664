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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "deepskip/audio.hpp"
#include "deepskip/common.hpp"

namespace deepskip {
namespace {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

/// Real-to-complex transform of fixed size with owned buffers.
class RealFft {
 public:
  explicit RealFft(int n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))),
        plan_(fftw_plan_dft_r2c_1d(n, in_.get(), out_.get(), FFTW_ESTIMATE)) {}

  double* input() { return in_.get(); }

  /// |X_k|^2 for k = 0..n/2.
  void power(std::vector<double>& out) {
    fftw_execute(plan_.get());
    out.resize(static_cast<std::size_t>(n_ / 2 + 1));
    for (int k = 0; k <= n_ / 2; ++k) out[k] = out_.get()[k][0] * out_.get()[k][0] + out_.get()[k][1] * out_.get()[k][1];
  }

 private:
  int n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan_;
};

int window_samples(const MfccConfig& cfg, int sr) { return static_cast<int>(std::lround(cfg.win_len * sr)); }
int hop_samples(const MfccConfig& cfg, int sr) { return static_cast<int>(std::lround(cfg.hop * sr)); }

// n_mels x (n_fft/2 + 1) triangular weights, computed on the mel axis.
Eigen::MatrixXd mel_filterbank(const MfccConfig& cfg, int sr) {
  const double hi = cfg.high_freq > 0.0 ? cfg.high_freq : sr / 2.0;
  const double mlo = hz_to_mel(cfg.low_freq);
  const double mhi = hz_to_mel(hi);
  const double step = (mhi - mlo) / (cfg.n_mels + 1);
  const int bins = cfg.n_fft / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = mlo + m * step;
    const double center = left + step;
    const double right = center + step;
    for (int k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sr / cfg.n_fft);
      if (mel > left && mel < right) {
        fb(m, k) = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
      }
    }
  }
  return fb;
}

}  // namespace

void MfccConfig::validate(int sample_rate) const {
  if (sample_rate < 8000) throw DataError("sample_rate", "MFCC needs a sample rate of at least 8 kHz");
  const int win = window_samples(*this, sample_rate);
  if (win < 2 || hop_samples(*this, sample_rate) < 1) throw ConfigError("mfcc_window", "window and hop must be positive");
  if (n_fft < win) throw ConfigError("n_fft", "n_fft must be at least the window length in samples");
  if (n_mels < 2 || n_ceps < 1 || n_ceps > n_mels) throw ConfigError("n_mels", "need 1 <= n_ceps <= n_mels, n_mels >= 2");
  if (!(log_floor > 0.0)) throw ConfigError("log_floor", "log_floor must be positive");
  if (delta_window < 1) throw ConfigError("delta_window", "delta window must be >= 1");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_center_frequencies(const MfccConfig& cfg, int sample_rate) {
  const double hi = cfg.high_freq > 0.0 ? cfg.high_freq : sample_rate / 2.0;
  const double mlo = hz_to_mel(cfg.low_freq);
  const double step = (hz_to_mel(hi) - mlo) / (cfg.n_mels + 1);
  std::vector<double> out;
  for (int m = 0; m < cfg.n_mels; ++m) out.push_back(mel_to_hz(mlo + (m + 1) * step));
  return out;
}

int num_frames(std::size_t n_samples, const MfccConfig& cfg, int sample_rate) {
  const auto win = static_cast<std::size_t>(window_samples(cfg, sample_rate));
  if (n_samples < win) return 0;
  return 1 + static_cast<int>((n_samples - win) / static_cast<std::size_t>(hop_samples(cfg, sample_rate)));
}

Eigen::MatrixXd mel_energies(const Waveform& w, const MfccConfig& cfg) {
  cfg.validate(w.sample_rate);
  const int sr = w.sample_rate;
  const int win = window_samples(cfg, sr);
  const int hop = hop_samples(cfg, sr);
  const int t_frames = num_frames(w.samples.size(), cfg, sr);
  if (t_frames < 1) throw DataError("too_short", "waveform is shorter than one analysis window");

  std::vector<double> hamming(static_cast<std::size_t>(win));
  for (int n = 0; n < win; ++n) {
    hamming[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (win - 1));
  }
  const Eigen::MatrixXd fb = mel_filterbank(cfg, sr);
  RealFft fft(cfg.n_fft);
  std::vector<double> power;
  Eigen::MatrixXd out(t_frames, cfg.n_mels);
  for (int t = 0; t < t_frames; ++t) {
    const double* x = w.samples.data() + static_cast<std::size_t>(t) * hop;
    double* in = fft.input();
    in[0] = x[0] * (1.0 - cfg.preemphasis) * hamming[0];
    for (int n = 1; n < win; ++n) in[n] = (x[n] - cfg.preemphasis * x[n - 1]) * hamming[n];
    std::fill(in + win, in + cfg.n_fft, 0.0);
    fft.power(power);
    out.row(t) = (fb * Eigen::Map<const Eigen::VectorXd>(power.data(), static_cast<Eigen::Index>(power.size()))).transpose();
  }
  return out;
}

Eigen::MatrixXd compute_deltas(const Eigen::MatrixXd& feats, int window) {
  const Eigen::Index t_frames = feats.rows();
  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += 2.0 * n * n;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t_frames, feats.cols());
  for (Eigen::Index t = 0; t < t_frames; ++t) {
    for (int n = 1; n <= window; ++n) {
      const Eigen::Index fwd = std::min<Eigen::Index>(t + n, t_frames - 1);
      const Eigen::Index bwd = std::max<Eigen::Index>(t - n, 0);
      out.row(t) += n * (feats.row(fwd) - feats.row(bwd));
    }
    out.row(t) /= denom;
  }
  return out;
}

FrameSequence compute_mfcc(const Waveform& w, const MfccConfig& cfg) {
  const Eigen::MatrixXd energies = mel_energies(w, cfg);
  const int m = cfg.n_mels;
  // Orthonormal DCT-II, first n_ceps rows.
  Eigen::MatrixXd dct(cfg.n_ceps, m);
  for (int k = 0; k < cfg.n_ceps; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (int n = 0; n < m; ++n) dct(k, n) = scale * std::cos(std::numbers::pi * k * (2 * n + 1) / (2.0 * m));
  }
  const Eigen::MatrixXd logmel = energies.array().max(cfg.log_floor).log().matrix();
  const Eigen::MatrixXd ceps = logmel * dct.transpose();
  const Eigen::MatrixXd d1 = compute_deltas(ceps, cfg.delta_window);
  const Eigen::MatrixXd d2 = compute_deltas(d1, cfg.delta_window);

  FrameSequence fs;
  fs.source = SourceTag::kMfcc;
  fs.frame_shift = static_cast<float>(static_cast<double>(std::lround(cfg.hop * w.sample_rate)) / w.sample_rate);
  fs.frames.resize(ceps.rows(), 3 * cfg.n_ceps);
  fs.frames.leftCols(cfg.n_ceps) = ceps.cast<float>();
  fs.frames.middleCols(cfg.n_ceps, cfg.n_ceps) = d1.cast<float>();
  fs.frames.rightCols(cfg.n_ceps) = d2.cast<float>();
  return fs;
}

}  // namespace deepskip
