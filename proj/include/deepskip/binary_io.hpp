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

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "deepskip/common.hpp"

namespace deepskip::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline void read_bytes(std::istream& in, char* dst, std::size_t n, const std::string& path) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw DataError("truncated_payload", path + ": truncated payload");
}

template <typename U>
void write_pod(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U read_pod(std::istream& in, const std::string& path) {
  U v{};
  read_bytes(in, reinterpret_cast<char*>(&v), sizeof(U), path);
  return v;
}

inline void write_u32(std::ostream& out, std::uint32_t v) { write_pod(out, v); }
inline void write_i64(std::ostream& out, std::int64_t v) { write_pod(out, v); }
inline std::uint32_t read_u32(std::istream& in, const std::string& path) { return read_pod<std::uint32_t>(in, path); }
inline std::int64_t read_i64(std::istream& in, const std::string& path) { return read_pod<std::int64_t>(in, path); }

inline void write_f32_array(std::ostream& out, const float* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(float)));
}
inline void read_f32_array(std::istream& in, float* p, std::size_t n, const std::string& path) {
  read_bytes(in, reinterpret_cast<char*>(p), n * sizeof(float), path);
}

}  // namespace deepskip::io
