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

#include "smokeseg/imagery/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "smokeseg/errors.hpp"

namespace smokeseg::imagery {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'M', 'B', 'R', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFloat32 = 1;
constexpr std::size_t kHeaderBytes = 28;

template <typename T>
T swapped(T v) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

template <typename T>
void put(std::string& buf, T v, std::endian order) {
  if (order != std::endian::native) v = swapped(v);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

template <typename T>
T get(const char* src, std::endian order) {
  T v;
  std::memcpy(&v, src, sizeof(T));
  return order != std::endian::native ? swapped(v) : v;
}

}  // namespace

void write_raster(const fs::path& path, const Raster& raster, std::endian order) {
  const std::size_t expected = static_cast<std::size_t>(raster.height) * raster.width * raster.bands;
  if (raster.height <= 0 || raster.width <= 0 || raster.bands <= 0 || raster.data.size() != expected) {
    throw DataIntegrityError("write_raster: data does not match " + std::to_string(raster.height) + "x" +
                             std::to_string(raster.width) + "x" + std::to_string(raster.bands));
  }
  std::string buf;
  buf.reserve(kHeaderBytes + expected * sizeof(float));
  buf.append(kMagic, 4);
  buf.push_back(order == std::endian::little ? 'L' : 'B');
  buf.append(3, '\0');
  for (std::uint32_t v : {kVersion, static_cast<std::uint32_t>(raster.height), static_cast<std::uint32_t>(raster.width),
                          static_cast<std::uint32_t>(raster.bands), kFloat32}) {
    put(buf, v, order);
  }
  for (float v : raster.data) put(buf, v, order);

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("cannot write raster " + path.string());
}

Raster read_raster(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < kHeaderBytes || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw DataIntegrityError(path.string() + ": not a raster container");
  }
  std::endian order;
  if (buf[4] == 'L') {
    order = std::endian::little;
  } else if (buf[4] == 'B') {
    order = std::endian::big;
  } else {
    throw DataIntegrityError(path.string() + ": bad byte-order flag");
  }
  const char* p = buf.data() + 8;
  const auto version = get<std::uint32_t>(p, order);
  const auto height = get<std::uint32_t>(p + 4, order);
  const auto width = get<std::uint32_t>(p + 8, order);
  const auto bands = get<std::uint32_t>(p + 12, order);
  const auto dtype = get<std::uint32_t>(p + 16, order);
  if (version != kVersion) throw DataIntegrityError(path.string() + ": unsupported version " + std::to_string(version));
  if (dtype != kFloat32) throw DataIntegrityError(path.string() + ": unsupported sample type " + std::to_string(dtype));
  if (height == 0 || width == 0 || bands == 0 || height > 65536 || width > 65536 || bands > 4096) {
    throw DataIntegrityError(path.string() + ": implausible dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(height) * width * bands;
  if (buf.size() != kHeaderBytes + count * sizeof(float)) {
    throw DataIntegrityError(path.string() + ": payload holds " + std::to_string(buf.size() - kHeaderBytes) +
                             " bytes, header implies " + std::to_string(count * sizeof(float)));
  }
  Raster r;
  r.height = static_cast<int>(height);
  r.width = static_cast<int>(width);
  r.bands = static_cast<int>(bands);
  r.data.resize(count);
  const char* src = buf.data() + kHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) r.data[i] = get<float>(src + i * sizeof(float), order);
  return r;
}

std::string BandScale::to_string() const {
  std::ostringstream out;
  out.precision(9);
  for (std::size_t i = 0; i < band_max.size(); ++i) out << (i ? "," : "") << band_max[i];
  return out.str();
}

BandScale BandScale::parse(const std::string& text) {
  BandScale scale;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      scale.band_max.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw DataIntegrityError("band_max: cannot parse '" + item + "'");
    }
  }
  return scale;
}

MultibandImage normalize(const Raster& raster, const BandScale& scale, std::string source_id) {
  if (raster.bands != kBandCount) {
    throw BandCountError(source_id + ": expected " + std::to_string(kBandCount) + " bands, found " +
                         std::to_string(raster.bands));
  }
  if (!scale.band_max.empty() && scale.band_max.size() != kBandCount) {
    throw BandCountError(source_id + ": band scale lists " + std::to_string(scale.band_max.size()) + " bands");
  }
  MultibandImage img;
  img.height = raster.height;
  img.width = raster.width;
  img.source_id = std::move(source_id);
  img.data.resize(raster.data.size());
  for (std::size_t i = 0; i < raster.data.size(); ++i) {
    const float v = raster.data[i];
    if (!std::isfinite(v)) throw DataIntegrityError(img.source_id + ": non-finite sample at index " + std::to_string(i));
    double divisor = scale.band_max.empty() ? 1.0 : scale.band_max[i % kBandCount];
    if (divisor == 0.0) divisor = 1.0;
    img.data[i] = static_cast<float>(std::clamp(v / divisor, 0.0, 1.0));
  }
  return img;
}

MultibandImage load_multiband(const fs::path& path, const BandScale& scale) {
  return normalize(read_raster(path), scale, path.filename().string());
}

BandScale dataset_band_max(const std::vector<fs::path>& paths) {
  BandScale scale;
  scale.band_max.assign(kBandCount, 0.0);
  for (const auto& p : paths) {
    const Raster r = read_raster(p);
    if (r.bands != kBandCount) {
      throw BandCountError(p.string() + ": expected 6 bands, found " + std::to_string(r.bands));
    }
    for (std::size_t i = 0; i < r.data.size(); ++i) {
      const float v = r.data[i];
      if (!std::isfinite(v)) throw DataIntegrityError(p.string() + ": non-finite sample");
      double& m = scale.band_max[i % kBandCount];
      m = std::max(m, static_cast<double>(v));
    }
  }
  return scale;
}

MultibandImage crop_or_pad(const MultibandImage& image, int size) {
  MultibandImage out;
  out.height = out.width = size;
  out.source_id = image.source_id;
  out.data.assign(static_cast<std::size_t>(size) * size * kBandCount, 0.0f);
  const int rows = std::min(size, image.height), cols = std::min(size, image.width);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int b = 0; b < kBandCount; ++b) out.at(r, c, b) = image.at(r, c, b);
    }
  }
  return out;
}

}  // namespace smokeseg::imagery
