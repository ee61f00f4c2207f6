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

#include <span>
#include <vector>

#include "smokeseg/imagery/labels.hpp"
#include "smokeseg/imagery/manifest.hpp"
#include "smokeseg/imagery/raster.hpp"
#include "smokeseg/nn/tensor.hpp"

namespace smokeseg::training {

struct Sample {
  imagery::MultibandImage image;
  imagery::LabelMask mask;
};

struct LoadedDataset {
  std::vector<Sample> train;
  std::vector<Sample> eval;
  imagery::BandScale scale;
};

/// Band scale recorded in the manifest ("band_max"), or the per-band maximum
/// over its images when absent.
imagery::BandScale manifest_band_scale(const imagery::DatasetManifest& manifest);

/// Loads and normalises every entry, cropping or padding images and masks
/// to size x size (padding is Gap). Unlabelled train entries are skipped.
LoadedDataset load_dataset(const imagery::DatasetManifest& manifest, int size);

imagery::LabelMask crop_or_pad(const imagery::LabelMask& mask, int size);

/// Stacks images into a [B, H, W, 6] tensor.
nn::Tensor to_tensor(std::span<const imagery::MultibandImage* const> images);

}  // namespace smokeseg::training
