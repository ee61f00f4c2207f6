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

#include <utility>
#include <vector>

#include "smokeseg/imagery/labels.hpp"
#include "smokeseg/imagery/raster.hpp"

namespace smokeseg::imagery {

/// The eight symmetries of the square. Variant v mirrors left-right when
/// v >= 4, then turns clockwise by 90 degrees (v % 4) times; variant 0 is
/// the identity.
inline constexpr int kDihedralVariants = 8;

/// Source pixel of output pixel (row, col) under `variant`, for an input of
/// height x width.
std::pair<int, int> dihedral_source(int variant, int row, int col, int height, int width);

MultibandImage transform(const MultibandImage& image, int variant);
LabelMask transform(const LabelMask& mask, int variant);

/// All eight variants of a training pair, identity first. Throws
/// PairingError when the image and mask sizes differ.
std::vector<std::pair<MultibandImage, LabelMask>> augment(const MultibandImage& image, const LabelMask& mask);

}  // namespace smokeseg::imagery
