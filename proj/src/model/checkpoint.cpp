// Copyright 2026 The smokeseg Authors
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

#include "smokeseg/model/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "smokeseg/errors.hpp"

namespace smokeseg::model {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'S', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_le(std::istream& in, const fs::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataIntegrityError(path.string() + ": truncated checkpoint");
  return to_little(v);
}

}  // namespace

void save_checkpoint(const fs::path& path, const SegmentationModel& model, const Provenance& provenance) {
  json header;
  header["model"] = model.spec().canonical_name();
  json cfg = json::object();
  for (const auto& [k, v] : network::to_fields(model.config())) cfg[k] = v;
  header["config"] = cfg;
  json params = json::array();
  const auto named = model.named_parameters();
  for (const auto& p : named) params.push_back({{"name", p.name}, {"shape", p.var.shape()}});
  header["parameters"] = params;
  header["provenance"] = provenance;
  const std::string text = header.dump();

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : named) {
      for (double v : p.var.value().values()) write_le(out, v);
    }
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataIntegrityError(path.string() + ": not a checkpoint file");
  }
  if (const auto version = read_le<std::uint32_t>(in, path); version != kVersion) {
    throw DataIntegrityError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = read_le<std::uint64_t>(in, path);
  if (length > (1u << 30)) throw DataIntegrityError(path.string() + ": implausible header length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw DataIntegrityError(path.string() + ": truncated header");
  }

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw DataIntegrityError(path.string() + ": bad header: " + e.what());
  }

  Checkpoint ck;
  try {
    const ModelSpec spec = parse_model_name(header.at("model").get<std::string>());
    network::BlockConfig cfg;
    for (const auto& [k, v] : header.at("config").items()) {
      if (!network::set_field(cfg, k, v.get<std::string>())) {
        throw DataIntegrityError(path.string() + ": unknown config field '" + k + "'");
      }
    }
    ck.provenance = header.at("provenance").get<Provenance>();
    ck.model = build_model(spec, cfg, 0);

    const auto named = ck.model->named_parameters();
    const auto& stored = header.at("parameters");
    if (stored.size() != named.size()) {
      throw DataIntegrityError(path.string() + ": parameter list does not match the model");
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
      if (stored[i].at("name").get<std::string>() != named[i].name ||
          stored[i].at("shape").get<nn::Shape>() != named[i].var.shape()) {
        throw DataIntegrityError(path.string() + ": parameter '" + named[i].name + "' does not match the model");
      }
    }
    for (const auto& p : named) {
      nn::Var var = p.var;
      for (double& v : var.mutable_value().values()) v = read_le<double>(in, path);
    }
  } catch (const json::exception& e) {
    throw DataIntegrityError(path.string() + ": bad header: " + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataIntegrityError(path.string() + ": trailing bytes after payload");
  }
  return ck;
}

}  // namespace smokeseg::model
