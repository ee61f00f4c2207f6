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

#include <cstdint>
#include <filesystem>

#include "smokeseg/imagery/labels.hpp"
#include "smokeseg/imagery/manifest.hpp"
#include "smokeseg/imagery/raster.hpp"

namespace smokeseg::imagery {

/// Inclusive bounds on the fraction of an image's pixels carrying a class.
struct FractionRange {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double f) const { return f >= lo && f <= hi; }
};

/// Parameters of the synthetic scene generator.
///
/// A scene is a smooth, band-correlated land background under one to three
/// anisotropic Gaussian smoke plumes (bright in the visible bands, dark in
/// SWIR) and zero to two soft-edged cloud disks (bright everywhere). Pixels
/// are labelled from the plume and cloud opacities: Cloud at cloud opacity
/// >= 0.5, otherwise Smoke at smoke opacity >= 0.5, otherwise Clear when
/// both opacities are below `clear_below`, otherwise Gap. Labelled pixels
/// within `gap_margin` pixels (chessboard distance) of a different class are
/// then turned into Gap. Scenes whose class fractions fall outside the
/// target ranges are redrawn.
struct SynthOptions {
  std::uint64_t seed = 0;
  int count = 1;
  int height = 256;
  int width = 256;
  double eval_fraction = 0.25;  // floor(count * eval_fraction) eval entries
  double clear_below = 0.15;
  int gap_margin = 1;
  FractionRange smoke{0.05, 0.50};
  FractionRange cloud{0.0, 0.35};
  FractionRange clear{0.15, 0.95};
  int max_attempts = 500;
};

struct SynthSample {
  Raster raster;  // reflectance scaled by 10000, six bands
  LabelMask mask;
};

/// Scene `index` of the stream defined by options.seed. Throws DataError
/// if no scene meets the target ranges within max_attempts draws.
SynthSample synth_sample(const SynthOptions& options, int index);

/// Writes options.count scenes ("image_NNNN.mbr", "label_NNNN.png") and
/// "manifest.tsv" into out_dir, the last floor(count * eval_fraction)
/// scenes forming the eval split. The manifest records the generator
/// parameters and the dataset-wide per-band maximum ("band_max").
DatasetManifest synth_generate(const std::filesystem::path& out_dir, const SynthOptions& options);

}  // namespace smokeseg::imagery
