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
#include <string>
#include <vector>

#include "deepskip/nn/adam.hpp"
#include "deepskip/nn/tensor.hpp"

namespace deepskip::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedBlob {
  std::string name;
  Mat<float> value;
};

/// Layout (little-endian): "CKP1", u32 version, u32 n + config JSON bytes,
/// u32 epoch, u32 param count, per param {u32 name length, name, u32 rows,
/// u32 cols, f32 payload}, i64 Adam step, then the m and v blobs in
/// parameter order with the same per-blob layout.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_json;
  int epoch = 0;
  std::vector<NamedBlob> params;
  std::int64_t adam_steps = 0;
  std::vector<NamedBlob> adam_m;
  std::vector<NamedBlob> adam_v;
};

Checkpoint make_checkpoint(const std::string& config_json, int epoch, const ParamList<float>& params,
                           const Adam<float>* adam);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
/// Throws DataError("bad_magic"), ("unsupported_version") or ("truncated_payload").
Checkpoint load_checkpoint(const std::string& path);
/// Copies blobs into `params` by name; shapes must match exactly.
void restore_checkpoint(const Checkpoint& ckpt, const ParamList<float>& params, Adam<float>* adam);

}  // namespace deepskip::nn
