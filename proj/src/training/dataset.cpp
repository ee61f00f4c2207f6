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

#include "smokeseg/training/dataset.hpp"

#include "smokeseg/errors.hpp"

namespace smokeseg::training {

using namespace smokeseg::imagery;

BandScale manifest_band_scale(const DatasetManifest& manifest) {
  if (const auto it = manifest.metadata.find("band_max"); it != manifest.metadata.end()) {
    BandScale scale = BandScale::parse(it->second);
    if (scale.band_max.size() != kBandCount) {
      throw BandCountError("manifest band_max lists " + std::to_string(scale.band_max.size()) + " bands");
    }
    return scale;
  }
  std::vector<std::filesystem::path> images;
  for (const auto& e : manifest.entries) images.push_back(e.image);
  return dataset_band_max(images);
}

LabelMask crop_or_pad(const LabelMask& mask, int size) {
  LabelMask out(size, size);
  for (int r = 0; r < std::min(size, mask.height); ++r) {
    for (int c = 0; c < std::min(size, mask.width); ++c) out.set(r, c, mask.at(r, c));
  }
  return out;
}

LoadedDataset load_dataset(const DatasetManifest& manifest, int size) {
  LoadedDataset data;
  data.scale = manifest_band_scale(manifest);
  for (const auto& e : manifest.entries) {
    if (e.label.empty()) continue;
    MultibandImage image = load_multiband(e.image, data.scale);
    LabelMask mask = load_label(e.label, image.height, image.width);
    Sample s{imagery::crop_or_pad(image, size), crop_or_pad(mask, size)};
    (e.split == Split::Train ? data.train : data.eval).push_back(std::move(s));
  }
  return data;
}

nn::Tensor to_tensor(std::span<const MultibandImage* const> images) {
  if (images.empty()) throw PairingError("to_tensor: empty batch");
  const int H = images[0]->height, W = images[0]->width;
  nn::Tensor t({static_cast<int>(images.size()), H, W, kBandCount});
  double* dst = t.data();
  for (const MultibandImage* img : images) {
    if (img->height != H || img->width != W) throw PairingError("to_tensor: images differ in size");
    for (float v : img->data) *dst++ = v;
  }
  return t;
}

}  // namespace smokeseg::training
