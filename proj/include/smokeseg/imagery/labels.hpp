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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace smokeseg::imagery {

/// Per-pixel codes. Gap marks pixels the annotator left unlabelled.
enum class PixelClass : std::uint8_t { Gap = 0, Smoke = 1, Cloud = 2, Clear = 3 };

inline constexpr std::array<PixelClass, 3> kLabelledClasses{PixelClass::Smoke, PixelClass::Cloud, PixelClass::Clear};

std::string to_string(PixelClass c);

struct LabelMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> codes;  // row-major PixelClass values

  LabelMask() = default;
  LabelMask(int h, int w, PixelClass fill = PixelClass::Gap)
      : height(h), width(w), codes(static_cast<std::size_t>(h) * w, static_cast<std::uint8_t>(fill)) {}

  PixelClass at(int row, int col) const { return static_cast<PixelClass>(codes[index(row, col)]); }
  void set(int row, int col, PixelClass c) { codes[index(row, col)] = static_cast<std::uint8_t>(c); }
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
  std::size_t count(PixelClass c) const;
  friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

struct RasterizedLabels {
  LabelMask mask;
  std::vector<std::string> warnings;
};

/// Paints the shapes of a Labelme document onto an all-Gap mask, in document
/// order, so later shapes overwrite earlier ones. Points are (x, y) in pixel
/// units with the image's top-left corner at the origin; a pixel is covered
/// when its centre (col + 0.5, row + 0.5) lies inside the shape or on its
/// outline (even-odd rule). "polygon" and "rectangle" shapes are painted;
/// other shape types and polygons with fewer than three distinct vertices
/// are skipped with a warning. Class names are matched case-insensitively.
RasterizedLabels rasterize_labels(const std::string& labelme_json, int height, int width);
RasterizedLabels rasterize_labels_file(const std::filesystem::path& path, int height, int width);

/// Interleaved 8-bit RGB image.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Smoke red, Cloud green, Clear blue, Gap black.
RgbImage mask_to_rgb(const LabelMask& mask);
/// Inverse of mask_to_rgb. Any other colour raises LabelSchemaError.
LabelMask rgb_to_mask(const RgbImage& image);

/// Reads a mask from a colour PNG or, for ".json" files, from a Labelme
/// document rasterised at height x width.
LabelMask load_label(const std::filesystem::path& path, int height, int width);

}  // namespace smokeseg::imagery
