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

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deepskip {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
};

/// Base error type. `tag` is a short machine-readable label such as
/// "empty_vocabulary" or "truncated_payload".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string tag, const std::string& what)
      : std::runtime_error(what), kind_(kind), tag_(std::move(tag)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& tag() const { return tag_; }

 private:
  ErrorKind kind_;
  std::string tag_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string tag, const std::string& what)
      : Error(ErrorKind::kConfig, std::move(tag), what) {}
};

class DataError : public Error {
 public:
  DataError(std::string tag, const std::string& what)
      : Error(ErrorKind::kData, std::move(tag), what) {}
};

class NumericError : public Error {
 public:
  NumericError(std::string tag, const std::string& what)
      : Error(ErrorKind::kNumeric, std::move(tag), what) {}
};

using Rng = std::mt19937_64;

/// Derives an independent seed for a named random substream.
/// Every consumer of randomness takes its stream from here so that one
/// top-level seed drives a whole run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

/// Uniform double in [0, 1) built from the raw engine output so the value
/// does not depend on the standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

}  // namespace deepskip
