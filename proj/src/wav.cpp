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
#include <fstream>
#include <iterator>

#include "deepskip/audio.hpp"
#include "deepskip/common.hpp"

namespace deepskip {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io", "cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto malformed = [&](const std::string& why) {
    return DataError("malformed_container", path + ": malformed container (" + why + ")");
  };
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw malformed("missing RIFF/WAVE header");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  int channels = 0, rate = 0, bits = 0;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > buf.size()) throw malformed("short fmt chunk");
      const std::uint16_t format = read_u16(buf.data() + body);
      channels = read_u16(buf.data() + body + 2);
      rate = static_cast<int>(read_u32(buf.data() + body + 4));
      bits = read_u16(buf.data() + body + 14);
      if (format != 1 && format != 0xFFFE) {
        throw DataError("unsupported_encoding", path + ": only PCM WAV is supported");
      }
      if (bits != 16) throw DataError("unsupported_encoding", path + ": only 16-bit PCM is supported");
      if (channels != 1) throw DataError("not_mono", path + ": expected mono audio, got " +
                                                         std::to_string(channels) + " channels");
      if (rate <= 0) throw malformed("non-positive sample rate");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw malformed("data chunk before fmt chunk");
      if (body + size > buf.size()) throw malformed("truncated data chunk");
      if (size % 2 != 0) throw malformed("odd data length");
      Waveform w;
      w.sample_rate = rate;
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(buf.data() + body + 2 * i));
        w.samples[i] = raw / 32768.0;
      }
      if (w.samples.empty()) throw malformed("empty data chunk");
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw malformed(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

void write_wav(const std::string& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw ConfigError("sample_rate", "sample rate must be positive");
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double x : w.samples) {
    const long q = std::clamp(std::lround(x * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("io", "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace deepskip
