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

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "deepskip/audio.hpp"
#include "deepskip/common.hpp"
#include "deepskip/log.hpp"

namespace deepskip {
namespace {

static_assert(std::endian::native == std::endian::little, "AFV1 I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <typename T>
T get(const std::vector<char>& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io", "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

const char* source_tag_name(SourceTag tag) {
  switch (tag) {
    case SourceTag::kMfcc: return "mfcc";
    case SourceTag::kW2v2: return "w2v2";
    case SourceTag::kHubert: return "hubert";
  }
  return "unknown";
}

SourceTag parse_source_tag(const std::string& name) {
  if (name == "mfcc") return SourceTag::kMfcc;
  if (name == "w2v2") return SourceTag::kW2v2;
  if (name == "hubert") return SourceTag::kHubert;
  throw ConfigError("source_tag", "unknown feature source '" + name + "'");
}

// ---- normalization --------------------------------------------------------

NormStats compute_norm_stats(std::span<const FrameSequence> corpus, double eps_var) {
  long total = 0;
  int dim = -1;
  for (const auto& fs : corpus) {
    if (fs.num_frames() == 0) continue;
    if (dim >= 0 && fs.dim() != dim) throw DataError("dimension_mismatch", "feature dimension differs across the corpus");
    dim = fs.dim();
    total += fs.num_frames();
  }
  if (total < 2) throw DataError("too_few_frames", "normalization needs at least 2 frames");
  NormStats st;
  st.eps_var = eps_var;
  st.mean = Eigen::VectorXd::Zero(dim);
  for (const auto& fs : corpus) st.mean += fs.frames.cast<double>().colwise().sum().transpose();
  st.mean /= static_cast<double>(total);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& fs : corpus) {
    var += (fs.frames.cast<double>().rowwise() - st.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  st.std = (var / static_cast<double>(total)).cwiseSqrt();
  return st;
}

void apply_norm(FrameSequence& fs, const NormStats& stats) {
  if (fs.dim() != stats.mean.size()) throw DataError("dimension_mismatch", "normalization stats do not match feature dimension");
  for (int d = 0; d < fs.dim(); ++d) {
    if (stats.std[d] <= stats.eps_var) {
      fs.frames.col(d).setZero();
      continue;
    }
    const double mu = stats.mean[d];
    const double sd = stats.std[d];
    for (Eigen::Index t = 0; t < fs.frames.rows(); ++t) {
      fs.frames(t, d) = static_cast<float>((fs.frames(t, d) - mu) / sd);
    }
  }
}

void invert_norm(FrameSequence& fs, const NormStats& stats) {
  if (fs.dim() != stats.mean.size()) throw DataError("dimension_mismatch", "normalization stats do not match feature dimension");
  for (int d = 0; d < fs.dim(); ++d) {
    const double sd = std::max(stats.std[d], stats.eps_var);
    for (Eigen::Index t = 0; t < fs.frames.rows(); ++t) {
      fs.frames(t, d) = static_cast<float>(fs.frames(t, d) * sd + stats.mean[d]);
    }
  }
}

NormStats normalize_features(std::span<FrameSequence> corpus, double eps_var) {
  NormStats st = compute_norm_stats(corpus, eps_var);
  for (auto& fs : corpus) apply_norm(fs, st);
  return st;
}

void NormStats::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "norm-stats";
  j["version"] = 1;
  j["eps_var"] = eps_var;
  j["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  j["std"] = std::vector<double>(std.data(), std.data() + std.size());
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  out << j.dump(1) << '\n';
}

NormStats NormStats::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed_stats", path + ": " + e.what());
  }
  if (j.value("format", "") != "norm-stats") throw DataError("malformed_stats", path + ": not a norm-stats file");
  auto m = j.at("mean").get<std::vector<double>>();
  auto s = j.at("std").get<std::vector<double>>();
  if (m.size() != s.size() || m.empty()) throw DataError("malformed_stats", path + ": mean/std size mismatch");
  NormStats st;
  st.eps_var = j.at("eps_var").get<double>();
  st.mean = Eigen::Map<Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  st.std = Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  return st;
}

// ---- alignments -----------------------------------------------------------

bool is_silence_marker(const std::string& word) {
  return word.empty() || (word.front() == '<' && word.back() == '>');
}

void validate_alignment(Alignment& al) {
  std::erase_if(al.words, [](const AlignedWord& w) { return is_silence_marker(w.word); });
  double prev_end = 0.0;
  for (std::size_t i = 0; i < al.words.size(); ++i) {
    const auto& w = al.words[i];
    if (!(w.start >= 0.0) || !(w.start < w.end)) {
      throw DataError("bad_interval", "utterance " + al.utt_id + ": word '" + w.word +
                                          "' has start >= end or negative start");
    }
    if (i > 0 && w.start < prev_end) {
      throw DataError("overlapping_interval", "utterance " + al.utt_id + ": word '" + w.word +
                                                  "' overlaps or precedes the previous word");
    }
    prev_end = w.end;
  }
}

std::vector<Alignment> load_alignments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open alignments " + path);
  std::vector<Alignment> out;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string utt, word, s, e;
    if (!std::getline(fields, utt, '\t') || !std::getline(fields, word, '\t') ||
        !std::getline(fields, s, '\t') || !std::getline(fields, e)) {
      throw DataError("malformed_alignment", path + ":" + std::to_string(lineno) + ": expected 4 tab-separated fields");
    }
    auto [it, fresh] = index.emplace(utt, out.size());
    if (fresh) {
      out.push_back({utt, {}});
    } else if (it->second != out.size() - 1) {
      throw DataError("unordered_alignment", "utterance " + utt + ": entries are not contiguous in " + path);
    }
    try {
      out[it->second].words.push_back({word, std::stod(s), std::stod(e)});
    } catch (const std::exception&) {
      throw DataError("malformed_alignment", path + ":" + std::to_string(lineno) + ": bad time value");
    }
  }
  for (auto& al : out) validate_alignment(al);
  return out;
}

void save_alignments(std::span<const Alignment> alignments, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  char buf[96];
  for (const auto& al : alignments) {
    for (const auto& w : al.words) {
      std::snprintf(buf, sizeof(buf), "\t%.6f\t%.6f\n", w.start, w.end);
      out << al.utt_id << '\t' << w.word << buf;
    }
  }
}

Alignment parse_librispeech_alignment(const std::string& line) {
  std::istringstream in(line);
  Alignment al;
  std::string words_field, ends_field;
  if (!(in >> al.utt_id >> std::quoted(words_field) >> std::quoted(ends_field))) {
    throw DataError("malformed_alignment", "cannot parse LibriSpeech alignment line");
  }
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(cur);
    return parts;
  };
  auto words = split(words_field);
  auto ends = split(ends_field);
  if (words.size() != ends.size()) {
    throw DataError("malformed_alignment", "utterance " + al.utt_id + ": word and time counts differ");
  }
  double start = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const double end = std::stod(ends[i]);
    std::string w = words[i];
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    al.words.push_back({w, start, end});
    start = end;
  }
  validate_alignment(al);
  return al;
}

std::vector<WordSegment> segment_words(const FrameSequence& fs, const Alignment& al) {
  const int t_frames = fs.num_frames();
  const double shift = fs.frame_shift;
  std::vector<WordSegment> out;
  for (std::size_t i = 0; i < al.words.size(); ++i) {
    const auto& w = al.words[i];
    const int start = std::clamp(static_cast<int>(std::lround(w.start / shift)), 0, t_frames);
    const int end = std::clamp(static_cast<int>(std::lround(w.end / shift)), 0, t_frames);
    if (end <= start) {
      log().warn("utterance {}: word '{}' ({:.3f}-{:.3f}s) has no frames; dropped", al.utt_id, w.word, w.start, w.end);
      continue;
    }
    out.push_back({w.word, static_cast<int>(i), start, end});
  }
  return out;
}

// ---- AFV1 -----------------------------------------------------------------

void write_feature_file(const std::string& path, const FrameSequence& fs) {
  std::string out = "AFV1";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fs.num_frames()));
  put<float>(out, fs.frame_shift);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(fs.source));
  out.append(reinterpret_cast<const char*>(fs.frames.data()),
             static_cast<std::size_t>(fs.frames.size()) * sizeof(float));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("io", "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("io", "write failed for " + path);
}

FrameSequence read_feature_file(const std::string& path, std::optional<int> expected_dim) {
  const auto buf = slurp(path);
  constexpr std::size_t kHeader = 4 + 4 + 4 + 4 + 1;
  if (buf.size() < 4 || std::memcmp(buf.data(), "AFV1", 4) != 0) {
    throw DataError("bad_magic", path + ": not an AFV1 file");
  }
  if (buf.size() < kHeader) throw DataError("truncated_payload", path + ": truncated payload (short header)");
  const auto d = get<std::uint32_t>(buf, 4);
  const auto t = get<std::uint32_t>(buf, 8);
  FrameSequence fs;
  fs.frame_shift = get<float>(buf, 12);
  const auto tag = get<std::uint8_t>(buf, 16);
  if (tag > 2) throw DataError("bad_source_tag", path + ": unknown source tag " + std::to_string(tag));
  fs.source = static_cast<SourceTag>(tag);
  const std::size_t payload = static_cast<std::size_t>(d) * t * sizeof(float);
  if (buf.size() - kHeader != payload) throw DataError("truncated_payload", path + ": truncated payload");
  if (expected_dim && static_cast<int>(d) != *expected_dim) {
    throw DataError("dimension_mismatch", path + ": dimension " + std::to_string(d) + " but expected " +
                                              std::to_string(*expected_dim));
  }
  fs.frames.resize(t, d);
  std::memcpy(fs.frames.data(), buf.data() + kHeader, payload);
  return fs;
}

// ---- manifest -------------------------------------------------------------

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("io", "cannot open manifest " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.utt_id = j.at("utt_id").get<std::string>();
      e.audio_path = j.value("audio_path", "");
      e.feature_path = j.value("feature_path", "");
      e.alignment.utt_id = e.utt_id;
      for (const auto& w : j.at("alignment")) {
        e.alignment.words.push_back({w.at(0).get<std::string>(), w.at(1).get<double>(), w.at(2).get<double>()});
      }
      validate_alignment(e.alignment);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError("malformed_manifest", path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

void write_manifest(std::span<const ManifestEntry> entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("io", "cannot write " + path);
  for (const auto& e : entries) {
    nlohmann::json j;
    j["utt_id"] = e.utt_id;
    j["audio_path"] = e.audio_path;
    j["feature_path"] = e.feature_path;
    j["alignment"] = nlohmann::json::array();
    for (const auto& w : e.alignment.words) j["alignment"].push_back({w.word, w.start, w.end});
    out << j.dump() << '\n';
  }
}

std::string resolve_path(const std::string& manifest_path, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || path.empty()) return path;
  return (std::filesystem::path(manifest_path).parent_path() / p).lexically_normal().string();
}

}  // namespace deepskip
