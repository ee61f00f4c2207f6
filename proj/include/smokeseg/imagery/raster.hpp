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

#pragma once

#include <bit>
#include <filesystem>
#include <string>
#include <vector>

namespace smokeseg::imagery {

/// Band order of every multiband image.
enum Band : int { Blue = 0, Green, Red, Nir, Swir1, Swir2 };
inline constexpr int kBandCount = 6;

/// Raw contents of a raster container: row-major height x width x bands.
struct Raster {
  int height = 0;
  int width = 0;
  int bands = 0;
  std::vector<float> data;

  float at(int row, int col, int band) const {
    return data[(static_cast<std::size_t>(row) * width + col) * bands + band];
  }
};

/// Container layout, all integers unsigned 32-bit in the declared order:
///
///   bytes 0-3   "MBRS"
///   byte  4     'L' (little-endian) or 'B' (big-endian)
///   bytes 5-7   zero
///   8..27       version (1), height, width, bands, dtype (1 = float32)
///   28..        height*width*bands float32 samples, band-interleaved by pixel
void write_raster(const std::filesystem::path& path, const Raster& raster,
                  std::endian order = std::endian::little);
/// Reads either byte order. IoError when unreadable, DataIntegrityError on a
/// malformed header or short payload.
Raster read_raster(const std::filesystem::path& path);

/// Per-band divisors applied on load. An empty list means "no scaling".
struct BandScale {
  std::vector<double> band_max;

  std::string to_string() const;
  /// Parses the comma-separated form written by to_string().
  static BandScale parse(const std::string& text);
};

/// A normalised six-band image with values in [0, 1].
struct MultibandImage {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // height x width x 6
  std::string source_id;

  float at(int row, int col, int band) const {
    return data[(static_cast<std::size_t>(row) * width + col) * kBandCount + band];
  }
  float& at(int row, int col, int band) {
    return data[(static_cast<std::size_t>(row) * width + col) * kBandCount + band];
  }
};

/// Divides each band by its scale (a zero max counts as one) and clamps to
/// [0, 1]. Throws BandCountError unless the raster has six bands and
/// DataIntegrityError on non-finite samples.
MultibandImage normalize(const Raster& raster, const BandScale& scale, std::string source_id = {});
MultibandImage load_multiband(const std::filesystem::path& path, const BandScale& scale);

/// Per-band maxima over a set of raster files.
BandScale dataset_band_max(const std::vector<std::filesystem::path>& paths);

/// Top-left crop or zero pad to size x size.
MultibandImage crop_or_pad(const MultibandImage& image, int size);

}  // namespace smokeseg::imagery
