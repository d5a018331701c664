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

#include "deepskip/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <unordered_map>

#include "deepskip/binary_io.hpp"

namespace deepskip::nn {

namespace {

void write_blob(std::ostream& out, const std::string& name, const Mat<float>& m) {
  io::write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  io::write_u32(out, static_cast<std::uint32_t>(m.rows()));
  io::write_u32(out, static_cast<std::uint32_t>(m.cols()));
  io::write_f32_array(out, m.data(), static_cast<std::size_t>(m.size()));
}

NamedBlob read_blob(std::istream& in, const std::string& path) {
  NamedBlob b;
  const std::uint32_t n = io::read_u32(in, path);
  b.name.resize(n);
  io::read_bytes(in, b.name.data(), n, path);
  const std::uint32_t rows = io::read_u32(in, path);
  const std::uint32_t cols = io::read_u32(in, path);
  b.value.resize(rows, cols);
  io::read_f32_array(in, b.value.data(), static_cast<std::size_t>(b.value.size()), path);
  return b;
}

}  // namespace

Checkpoint make_checkpoint(const std::string& config_json, int epoch, const ParamList<float>& params,
                           const Adam<float>* adam) {
  Checkpoint c;
  c.config_json = config_json;
  c.epoch = epoch;
  for (auto* p : params) c.params.push_back({p->name, p->value});
  if (adam != nullptr) {
    c.adam_steps = adam->steps();
    for (std::size_t i = 0; i < params.size(); ++i) {
      c.adam_m.push_back({params[i]->name, adam->first_moments().at(i)});
      c.adam_v.push_back({params[i]->name, adam->second_moments().at(i)});
    }
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("unwritable_path", "cannot write " + path);
  out.write("CKP1", 4);
  io::write_u32(out, c.version);
  io::write_u32(out, static_cast<std::uint32_t>(c.config_json.size()));
  out.write(c.config_json.data(), static_cast<std::streamsize>(c.config_json.size()));
  io::write_u32(out, static_cast<std::uint32_t>(c.epoch));
  io::write_u32(out, static_cast<std::uint32_t>(c.params.size()));
  for (const auto& b : c.params) write_blob(out, b.name, b.value);
  io::write_i64(out, c.adam_steps);
  io::write_u32(out, static_cast<std::uint32_t>(c.adam_m.size()));
  for (const auto& b : c.adam_m) write_blob(out, b.name, b.value);
  for (const auto& b : c.adam_v) write_blob(out, b.name, b.value);
  if (!out) throw DataError("unwritable_path", "failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing_file", "cannot open " + path);
  char magic[4];
  io::read_bytes(in, magic, 4, path);
  if (std::memcmp(magic, "CKP1", 4) != 0) throw DataError("bad_magic", path + ": not a CKP1 file");
  Checkpoint c;
  c.version = io::read_u32(in, path);
  if (c.version != kCheckpointVersion) {
    throw DataError("unsupported_version", path + ": checkpoint version " + std::to_string(c.version));
  }
  const std::uint32_t n = io::read_u32(in, path);
  c.config_json.resize(n);
  io::read_bytes(in, c.config_json.data(), n, path);
  c.epoch = static_cast<int>(io::read_u32(in, path));
  const std::uint32_t np = io::read_u32(in, path);
  for (std::uint32_t i = 0; i < np; ++i) c.params.push_back(read_blob(in, path));
  c.adam_steps = io::read_i64(in, path);
  const std::uint32_t nm = io::read_u32(in, path);
  for (std::uint32_t i = 0; i < nm; ++i) c.adam_m.push_back(read_blob(in, path));
  for (std::uint32_t i = 0; i < nm; ++i) c.adam_v.push_back(read_blob(in, path));
  return c;
}

void restore_checkpoint(const Checkpoint& c, const ParamList<float>& params, Adam<float>* adam) {
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < c.params.size(); ++i) by_name[c.params[i].name] = i;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto* p = params[i];
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw DataError("missing_parameter", "checkpoint lacks " + p->name);
    const auto& v = c.params[it->second].value;
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw DataError("dimension_mismatch", "checkpoint shape differs for " + p->name);
    }
    p->value = v;
    if (adam != nullptr && !c.adam_m.empty()) {
      adam->first_moments().at(i) = c.adam_m.at(it->second).value;
      adam->second_moments().at(i) = c.adam_v.at(it->second).value;
    }
  }
  if (adam != nullptr) adam->set_steps(c.adam_steps);
}

}  // namespace deepskip::nn
