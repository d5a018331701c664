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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "deepskip/audio.hpp"
#include "deepskip/common.hpp"

using namespace deepskip;

namespace {

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("deepskip_" + name)).string();
}

Waveform sine(double hz, double seconds, int rate = 16000) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(0.5 * std::sin(2.0 * std::numbers::pi * hz * i / rate));
  return w;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint16_t bits, std::uint32_t data_bytes) {
  std::string s = "RIFF";
  put_u32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, format);
  put_u16(s, channels);
  put_u32(s, 16000);
  put_u32(s, 16000 * channels * bits / 8);
  put_u16(s, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(s, bits);
  s += "data";
  put_u32(s, data_bytes);
  s.append(data_bytes, '\0');
  return s;
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string error_tag(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.tag();
  }
  return "";
}

}  // namespace

TEST_CASE("wav round trip keeps length, rate and quantised samples") {
  Waveform w = sine(300, 0.5);
  write_wav(tmp("a.wav"), w);
  Waveform r = read_wav(tmp("a.wav"));
  CHECK(r.sample_rate == 16000);
  REQUIRE(r.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
  Waveform z;
  z.sample_rate = 16000;
  z.samples.assign(1000, 0.0);
  write_wav(tmp("z.wav"), z);
  for (double v : read_wav(tmp("z.wav")).samples) CHECK(v == 0.0);
}

TEST_CASE("wav reader rejects bad containers") {
  write_bytes(tmp("trunc.wav"), wav_bytes(1, 1, 16, 400).substr(0, 100));
  CHECK(error_tag([] { read_wav(tmp("trunc.wav")); }) == "malformed_container");
  write_bytes(tmp("junk.wav"), "hello");
  CHECK(error_tag([] { read_wav(tmp("junk.wav")); }) == "malformed_container");
  write_bytes(tmp("stereo.wav"), wav_bytes(1, 2, 16, 400));
  CHECK(error_tag([] { read_wav(tmp("stereo.wav")); }) == "not_mono");
  write_bytes(tmp("float.wav"), wav_bytes(3, 1, 32, 400));
  CHECK(error_tag([] { read_wav(tmp("float.wav")); }) == "unsupported_encoding");
  write_bytes(tmp("u8.wav"), wav_bytes(1, 1, 8, 400));
  CHECK(error_tag([] { read_wav(tmp("u8.wav")); }) == "unsupported_encoding");
}

TEST_CASE("mel scale round trips") {
  for (double hz : {0.0, 100.0, 440.0, 1000.0, 7999.0}) CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz));
  CHECK(hz_to_mel(1000.0) == doctest::Approx(1000.0).epsilon(1e-3));
}

TEST_CASE("frame count follows the framing arithmetic") {
  MfccConfig cfg;
  for (std::size_t n : {400u, 401u, 559u, 560u, 16000u}) {
    const int expect = 1 + static_cast<int>((n - 400) / 160);
    CHECK(num_frames(n, cfg, 16000) == expect);
    Waveform w;
    w.sample_rate = 16000;
    w.samples.assign(n, 0.1);
    CHECK(compute_mfcc(w, cfg).num_frames() == expect);
  }
  Waveform short_w;
  short_w.sample_rate = 16000;
  short_w.samples.assign(399, 0.0);
  CHECK_THROWS_AS(compute_mfcc(short_w), DataError);
  Waveform low = sine(100, 1.0, 4000);
  CHECK_THROWS_AS(compute_mfcc(low), DataError);
}

TEST_CASE("a 440 Hz tone peaks in the filter centred nearest 440 Hz") {
  MfccConfig cfg;
  const auto centers = mel_center_frequencies(cfg, 16000);
  REQUIRE(centers.size() == 26);
  int nearest = 0;
  for (int i = 1; i < 26; ++i)
    if (std::abs(centers[i] - 440.0) < std::abs(centers[nearest] - 440.0)) nearest = i;
  const Eigen::MatrixXd e = mel_energies(sine(440, 1.0), cfg);
  for (Eigen::Index t = 0; t < e.rows(); ++t) {
    Eigen::Index arg;
    e.row(t).maxCoeff(&arg);
    CHECK(arg == nearest);
  }
}

TEST_CASE("silence gives floor log energies, constant cepstra and zero deltas") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(8000, 0.0);
  MfccConfig cfg;
  FrameSequence fs = compute_mfcc(w, cfg);
  REQUIRE(fs.dim() == 39);
  CHECK(fs.frame_shift == doctest::Approx(0.01));
  CHECK(fs.source == SourceTag::kMfcc);
  const double c0 = std::sqrt(26.0) * std::log(1e-10);
  for (int t = 0; t < fs.num_frames(); ++t) {
    CHECK(fs.frames(t, 0) == doctest::Approx(c0).epsilon(1e-6));
    for (int d = 1; d < 13; ++d) CHECK(std::abs(fs.frames(t, d)) < 1e-4);
    for (int d = 13; d < 39; ++d) CHECK(fs.frames(t, d) == 0.0f);
  }
}

TEST_CASE("deltas of a constant track are exactly zero") {
  Eigen::MatrixXd f = Eigen::MatrixXd::Constant(12, 5, 3.25);
  CHECK(compute_deltas(f, 2).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd ramp(10, 1);
  for (int t = 0; t < 10; ++t) ramp(t, 0) = 2.0 * t;
  Eigen::MatrixXd d = compute_deltas(ramp, 2);
  for (int t = 2; t < 8; ++t) CHECK(d(t, 0) == doctest::Approx(2.0));
}

TEST_CASE("shifting the signal by one hop drops one frame") {
  Rng rng = make_rng(1, "shift");
  Waveform w;
  w.sample_rate = 16000;
  for (int i = 0; i < 16000; ++i) w.samples.push_back(0.3 * std::sin(0.05 * i) + 0.1 * (uniform01(rng) - 0.5));
  Waveform s = w;
  s.samples.erase(s.samples.begin(), s.samples.begin() + 160);
  FrameSequence a = compute_mfcc(w), b = compute_mfcc(s);
  REQUIRE(b.num_frames() == a.num_frames() - 1);
  for (int t = 0; t < b.num_frames(); ++t)
    for (int d = 0; d < 13; ++d) CHECK(std::abs(a.frames(t + 1, d) - b.frames(t, d)) <= 1e-6);
  // deltas and accelerations away from the edges
  for (int t = 4; t + 4 < b.num_frames(); ++t)
    for (int d = 13; d < 39; ++d) CHECK(std::abs(a.frames(t + 1, d) - b.frames(t, d)) <= 1e-6);
}

TEST_CASE("normalisation statistics, idempotence and inversion") {
  Rng rng = make_rng(2, "norm");
  std::vector<FrameSequence> corpus(3);
  for (auto& fs : corpus) {
    fs.frames.resize(50 + static_cast<int>(uniform_index(rng, 50)), 4);
    for (Eigen::Index i = 0; i < fs.frames.rows(); ++i) {
      fs.frames(i, 0) = static_cast<float>(100.0 + 20.0 * uniform01(rng));
      fs.frames(i, 1) = static_cast<float>(-3.0 + 0.01 * uniform01(rng));
      fs.frames(i, 2) = 7.0f;  // constant
      fs.frames(i, 3) = static_cast<float>(uniform01(rng) - 0.5);
    }
  }
  const auto original = corpus;
  NormStats st = normalize_features(corpus);
  long n = 0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sq = Eigen::VectorXd::Zero(4);
  for (const auto& fs : corpus)
    for (Eigen::Index i = 0; i < fs.frames.rows(); ++i) {
      ++n;
      for (int d = 0; d < 4; ++d) {
        sum(d) += fs.frames(i, d);
        sq(d) += static_cast<double>(fs.frames(i, d)) * fs.frames(i, d);
      }
    }
  for (int d = 0; d < 4; ++d) {
    const double m = sum(d) / n;
    const double sd = std::sqrt(sq(d) / n - m * m);
    CHECK(std::abs(m) < 1e-6);
    if (d == 2) {
      CHECK(sd == 0.0);
    } else {
      CHECK(std::abs(sd - 1.0) < 1e-4);
    }
  }
  for (const auto& fs : corpus) CHECK(fs.frames.col(2).cwiseAbs().maxCoeff() == 0.0f);

  auto again = original;
  for (auto& fs : again) apply_norm(fs, st);
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].frames == corpus[i].frames);

  st.save(tmp("norm.json"));
  NormStats loaded = NormStats::load(tmp("norm.json"));
  CHECK(loaded.mean == st.mean);
  CHECK(loaded.std == st.std);

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    FrameSequence back = corpus[i];
    invert_norm(back, st);
    for (Eigen::Index r = 0; r < back.frames.rows(); ++r)
      for (int d = 0; d < 4; ++d) {
        if (d == 2) continue;
        const double x = original[i].frames(r, d);
        CHECK(std::abs(back.frames(r, d) - x) <= 1e-5 * std::max(1.0, std::abs(x)));
      }
  }
  std::vector<FrameSequence> one(1);
  one[0].frames = MatrixXfR::Zero(1, 2);
  CHECK_THROWS_AS(compute_norm_stats(one), DataError);
}

TEST_CASE("alignment loading") {
  {
    std::ofstream f(tmp("al.tsv"));
    f << "u1\tthe\t0.00\t0.31\nu1\tcat\t0.31\t0.77\nu1\t\t0.77\t0.90\nu1\t<sil>\t0.90\t1.0\nu2\tdog\t0.1\t0.5\n";
  }
  auto als = load_alignments(tmp("al.tsv"));
  REQUIRE(als.size() == 2);
  CHECK(als[0].utt_id == "u1");
  REQUIRE(als[0].words.size() == 2);
  CHECK(als[0].words[1].word == "cat");
  CHECK(als[0].words[1].end == doctest::Approx(0.77));
  {
    std::ofstream f(tmp("bad.tsv"));
    f << "u9\tthe\t0.5\t0.5\n";
  }
  try {
    load_alignments(tmp("bad.tsv"));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("u9") != std::string::npos);
  }
  {
    std::ofstream f(tmp("overlap.tsv"));
    f << "u7\ta\t0.0\t0.5\nu7\tb\t0.4\t0.9\n";
  }
  try {
    load_alignments(tmp("overlap.tsv"));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("u7") != std::string::npos);
  }
  save_alignments(als, tmp("al2.tsv"));
  auto back = load_alignments(tmp("al2.tsv"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].words[0].start == als[0].words[0].start);
}

TEST_CASE("published alignment layout converts to word intervals") {
  Alignment al = parse_librispeech_alignment("103-1240-0000 \",CHAPTER,ONE,\" \"0.490,1.030,1.360,1.500\"");
  CHECK(al.utt_id == "103-1240-0000");
  REQUIRE(al.words.size() == 2);
  CHECK(al.words[0].word == "chapter");
  CHECK(al.words[0].start == doctest::Approx(0.49));
  CHECK(al.words[0].end == doctest::Approx(1.03));
  CHECK(al.words[1].end == doctest::Approx(1.36));
}

TEST_CASE("segmentation arithmetic and clipping") {
  FrameSequence fs;
  fs.frames = MatrixXfR::Zero(100, 3);
  fs.frame_shift = 0.01f;
  Alignment al{"u", {{"a", 0.0, 0.5}}};
  auto s = segment_words(fs, al);
  REQUIRE(s.size() == 1);
  CHECK(s[0].start_frame == 0);
  CHECK(s[0].end_frame == 50);
  fs.frame_shift = 0.02f;
  s = segment_words(fs, al);
  CHECK(s[0].end_frame == 25);
  fs.frame_shift = 0.01f;
  Alignment over{"u", {{"a", 0.9, 1.004}}};
  s = segment_words(fs, over);
  CHECK(s[0].end_frame == 100);
  Alignment tiny{"u", {{"a", 0.1, 0.102}, {"b", 0.2, 0.3}}};
  s = segment_words(fs, tiny);
  REQUIRE(s.size() == 1);
  CHECK(s[0].word == "b");
  CHECK(s[0].word_index == 1);
}

TEST_CASE("segments of non-overlapping alignments never overlap") {
  Rng rng = make_rng(3, "seg");
  FrameSequence fs;
  fs.frames = MatrixXfR::Zero(500, 2);
  for (int trial = 0; trial < 100; ++trial) {
    Alignment al{"u", {}};
    double t = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double start = t + 0.03 * uniform01(rng);
      const double end = start + 0.001 + 0.4 * uniform01(rng);
      al.words.push_back({"w", start, end});
      t = end;
    }
    auto segs = segment_words(fs, al);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].start_frame < segs[i].end_frame);
      CHECK(segs[i].end_frame <= 500);
      if (i > 0) CHECK(segs[i - 1].end_frame <= segs[i].start_frame);
    }
  }
}

TEST_CASE("AFV1 files round trip bit for bit") {
  Rng rng = make_rng(4, "afv");
  FrameSequence fs;
  fs.frames.resize(37, 11);
  for (Eigen::Index i = 0; i < fs.frames.size(); ++i) fs.frames.data()[i] = static_cast<float>(uniform01(rng) * 1e3 - 5e2);
  fs.frames(0, 0) = -0.0f;
  fs.frame_shift = 0.02f;
  fs.source = SourceTag::kHubert;
  write_feature_file(tmp("x.afv"), fs);
  FrameSequence r = read_feature_file(tmp("x.afv"), 11);
  CHECK(r.source == SourceTag::kHubert);
  CHECK(r.frame_shift == 0.02f);
  REQUIRE(r.frames.size() == fs.frames.size());
  CHECK(std::memcmp(r.frames.data(), fs.frames.data(), sizeof(float) * fs.frames.size()) == 0);

  std::ifstream in(tmp("x.afv"), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(bytes.size() == 17 + 37 * 11 * 4);
  CHECK(bytes.substr(0, 4) == "AFV1");

  CHECK(error_tag([] { read_feature_file(tmp("x.afv"), 12); }) == "dimension_mismatch");
  write_bytes(tmp("bad.afv"), "AFV2" + bytes.substr(4));
  try {
    read_feature_file(tmp("bad.afv"));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.tag() == "bad_magic");
    CHECK(std::string(e.what()).find("not an AFV1 file") != std::string::npos);
  }
  write_bytes(tmp("short.afv"), bytes.substr(0, bytes.size() - 4));
  try {
    read_feature_file(tmp("short.afv"));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.tag() == "truncated_payload");
    CHECK(std::string(e.what()).find("truncated payload") != std::string::npos);
  }
}

TEST_CASE("checked-in AFV1 fixture parses") {
  FrameSequence fs = read_feature_file(std::string(DEEPSKIP_DATA_DIR) + "/fixtures/hubert_tiny.afv");
  CHECK(fs.source == SourceTag::kHubert);
  CHECK(fs.frame_shift == 0.02f);
  CHECK(fs.dim() == 8);
  CHECK(fs.num_frames() == 5);
  CHECK(fs.frames(0, 0) == 0.0f);
  CHECK(fs.frames(4, 7) == 39.0f * 0.25f);
}

TEST_CASE("manifest round trip and path resolution") {
  std::vector<ManifestEntry> m(2);
  m[0] = {"u1", "wav/u1.wav", "features/u1.afv", {"u1", {{"the", 0.0, 0.3}, {"cat", 0.3, 0.7}}}};
  m[1] = {"u2", "/abs/u2.wav", "features/u2.afv", {"u2", {{"dog", 0.1, 0.4}}}};
  write_manifest(m, tmp("m.jsonl"));
  auto back = read_manifest(tmp("m.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].utt_id == "u1");
  CHECK(back[0].alignment.words.size() == 2);
  CHECK(back[0].alignment.words[1].word == "cat");
  CHECK(back[1].audio_path == "/abs/u2.wav");
  CHECK(resolve_path("/data/set/m.jsonl", "features/u1.afv") == "/data/set/features/u1.afv");
  CHECK(resolve_path("/data/set/m.jsonl", "/abs/u2.wav") == "/abs/u2.wav");
  std::ifstream in(tmp("m.jsonl"));
  std::string line;
  std::getline(in, line);
  CHECK(line.find("\"utt_id\"") != std::string::npos);
  CHECK(line.find("\"alignment\"") != std::string::npos);
}
