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

#include "smokeseg/imagery/augment.hpp"

#include <algorithm>

#include "smokeseg/errors.hpp"

namespace smokeseg::imagery {

std::pair<int, int> dihedral_source(int variant, int row, int col, int height, int width) {
  if (variant < 0 || variant >= kDihedralVariants) throw ContractError("dihedral variant out of range");
  const int turns = variant % 4;
  // Walk back through the turns. Before a clockwise turn the frame has its
  // height and width swapped relative to after it.
  int h = (turns % 2) ? width : height;
  int w = (turns % 2) ? height : width;
  for (int t = 0; t < turns; ++t) {
    // out(r, c) = in(h_in - 1 - c, r) where h_in is the pre-turn height,
    // which equals the post-turn width.
    const int r = w - 1 - col;
    const int c = row;
    row = r;
    col = c;
    std::swap(h, w);
  }
  if (variant >= 4) col = width - 1 - col;
  return {row, col};
}

namespace {

template <typename Get, typename Put>
void remap(int variant, int height, int width, Get get, Put put) {
  const bool swap = (variant % 2) == 1;
  const int out_h = swap ? width : height, out_w = swap ? height : width;
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) {
      const auto [sr, sc] = dihedral_source(variant, r, c, height, width);
      put(r, c, out_w, get(sr, sc));
    }
  }
}

}  // namespace

MultibandImage transform(const MultibandImage& image, int variant) {
  MultibandImage out;
  const bool swap = (variant % 2) == 1;
  out.height = swap ? image.width : image.height;
  out.width = swap ? image.height : image.width;
  out.source_id = image.source_id;
  out.data.resize(image.data.size());
  remap(
      variant, image.height, image.width,
      [&](int r, int c) { return &image.data[(static_cast<std::size_t>(r) * image.width + c) * kBandCount]; },
      [&](int r, int c, int w, const float* src) {
        std::copy(src, src + kBandCount, &out.data[(static_cast<std::size_t>(r) * w + c) * kBandCount]);
      });
  return out;
}

LabelMask transform(const LabelMask& mask, int variant) {
  const bool swap = (variant % 2) == 1;
  LabelMask out(swap ? mask.width : mask.height, swap ? mask.height : mask.width);
  remap(
      variant, mask.height, mask.width, [&](int r, int c) { return mask.at(r, c); },
      [&](int r, int c, int, PixelClass v) { out.set(r, c, v); });
  return out;
}

std::vector<std::pair<MultibandImage, LabelMask>> augment(const MultibandImage& image, const LabelMask& mask) {
  if (image.height != mask.height || image.width != mask.width) {
    throw PairingError("augment: image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                       " does not match mask " + std::to_string(mask.height) + "x" + std::to_string(mask.width));
  }
  std::vector<std::pair<MultibandImage, LabelMask>> out;
  out.reserve(kDihedralVariants);
  for (int v = 0; v < kDihedralVariants; ++v) out.emplace_back(transform(image, v), transform(mask, v));
  return out;
}

}  // namespace smokeseg::imagery
