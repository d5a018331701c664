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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deepskip {

using MatrixXfR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Reads 16-bit PCM mono RIFF/WAVE. Errors are DataError with tags
/// "malformed_container", "unsupported_encoding" or "not_mono".
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

enum class SourceTag : std::uint8_t { kMfcc = 0, kW2v2 = 1, kHubert = 2 };

const char* source_tag_name(SourceTag tag);
SourceTag parse_source_tag(const std::string& name);

struct FrameSequence {
  MatrixXfR frames;  // T x D, row-major
  float frame_shift = 0.01f;  // seconds per frame
  SourceTag source = SourceTag::kMfcc;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

struct MfccConfig {
  int n_fft = 512;
  double win_len = 0.025;  // seconds
  double hop = 0.010;      // seconds
  int n_mels = 26;
  int n_ceps = 13;
  double log_floor = 1e-10;
  double preemphasis = 0.97;
  int delta_window = 2;
  double low_freq = 0.0;
  double high_freq = 0.0;  // 0 means Nyquist

  void validate(int sample_rate) const;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Centre frequency in Hz of each triangular mel filter.
std::vector<double> mel_center_frequencies(const MfccConfig& cfg, int sample_rate);

/// Number of frames for n samples: 1 + floor((n - win) / hop).
int num_frames(std::size_t n_samples, const MfccConfig& cfg, int sample_rate);

/// Linear (not log) mel filterbank energies, T x n_mels.
Eigen::MatrixXd mel_energies(const Waveform& w, const MfccConfig& cfg);

/// Regression deltas over +-window frames with edge replication.
Eigen::MatrixXd compute_deltas(const Eigen::MatrixXd& feats, int window);

/// 13 cepstra + 13 deltas + 13 accelerations per frame (D = 3 * n_ceps).
/// Pre-emphasis and the Hamming window are applied per frame, so a frame
/// depends only on its own samples.
FrameSequence compute_mfcc(const Waveform& w, const MfccConfig& cfg = {});

struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  double eps_var = 1e-8;

  void save(const std::string& path) const;
  static NormStats load(const std::string& path);
};

/// Per-dimension mean and (population) standard deviation over every frame
/// of every sequence. Needs at least 2 frames in total.
NormStats compute_norm_stats(std::span<const FrameSequence> corpus, double eps_var = 1e-8);

/// (x - mean) / max(std, eps_var); dimensions with std <= eps_var map to 0.
void apply_norm(FrameSequence& fs, const NormStats& stats);
void invert_norm(FrameSequence& fs, const NormStats& stats);

/// Normalizes the corpus in place and returns the statistics used.
NormStats normalize_features(std::span<FrameSequence> corpus, double eps_var = 1e-8);

struct AlignedWord {
  std::string word;
  double start = 0.0;  // seconds
  double end = 0.0;
};

struct Alignment {
  std::string utt_id;
  std::vector<AlignedWord> words;
};

/// True for silence markers: empty strings and "<...>" tokens.
bool is_silence_marker(const std::string& word);

/// Drops silence entries, then checks 0 <= start < end and ordered,
/// non-overlapping intervals. Throws DataError naming the utterance.
void validate_alignment(Alignment& al);

/// Normalized format: "utt_id\tword\tstart_s\tend_s" per line, utterances
/// contiguous. Returns alignments in first-appearance order.
std::vector<Alignment> load_alignments(const std::string& path);
void save_alignments(std::span<const Alignment> alignments, const std::string& path);

/// Parses one line of the published LibriSpeech alignment layout:
///   <utt_id> ",w1,w2,..." "e1,e2,..."
/// where each word starts where the previous one ended.
Alignment parse_librispeech_alignment(const std::string& line);

struct WordSegment {
  std::string word;
  int word_index = 0;  // position within the (silence-free) alignment
  int start_frame = 0;
  int end_frame = 0;   // exclusive
};

/// Frame slices for each aligned word: round(time / frame_shift), clipped to
/// [0, T]; zero-length slices are dropped with a warning.
std::vector<WordSegment> segment_words(const FrameSequence& fs, const Alignment& al);

/// AFV1: "AFV1", u32 D, u32 T, f32 frame_shift, u8 source_tag, then T*D f32,
/// all little-endian, row-major.
void write_feature_file(const std::string& path, const FrameSequence& fs);
FrameSequence read_feature_file(const std::string& path,
                                std::optional<int> expected_dim = std::nullopt);

struct ManifestEntry {
  std::string utt_id;
  std::string audio_path;
  std::string feature_path;
  Alignment alignment;  // utt_id mirrors the entry
};

/// Line-delimited JSON records with fields utt_id, audio_path, feature_path
/// and alignment ([[word, start_s, end_s], ...]). Relative paths are kept
/// as written; use resolve_path to anchor them at the manifest directory.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(std::span<const ManifestEntry> entries, const std::string& path);
std::string resolve_path(const std::string& manifest_path, const std::string& path);

}  // namespace deepskip
