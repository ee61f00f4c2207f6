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

#include "smokeseg/imagery/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "smokeseg/errors.hpp"
#include "smokeseg/imagery/png.hpp"
#include "smokeseg/random.hpp"

namespace smokeseg::imagery {

namespace fs = std::filesystem;

namespace {

using Spectrum = std::array<double, kBandCount>;

// Typical surface reflectance, Blue..SWIR2.
constexpr Spectrum kLand{0.05, 0.07, 0.08, 0.28, 0.22, 0.14};
constexpr Spectrum kSmoke{0.30, 0.28, 0.25, 0.22, 0.10, 0.05};
constexpr Spectrum kCloud{0.75, 0.74, 0.73, 0.72, 0.55, 0.45};
constexpr double kScale = 10000.0;

// Bilinear interpolation of a coarse random lattice: smooth values in [0, 1].
std::vector<double> smooth_field(Rng& rng, int height, int width, int cells) {
  std::vector<double> lattice(static_cast<std::size_t>(cells + 1) * (cells + 1));
  for (double& v : lattice) v = rng.uniform();
  std::vector<double> out(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    const double fy = (r + 0.5) / height * cells;
    const int y0 = std::min(cells - 1, static_cast<int>(fy));
    const double ty = fy - y0;
    for (int c = 0; c < width; ++c) {
      const double fx = (c + 0.5) / width * cells;
      const int x0 = std::min(cells - 1, static_cast<int>(fx));
      const double tx = fx - x0;
      auto at = [&](int y, int x) { return lattice[static_cast<std::size_t>(y) * (cells + 1) + x]; };
      out[static_cast<std::size_t>(r) * width + c] = (1 - ty) * ((1 - tx) * at(y0, x0) + tx * at(y0, x0 + 1)) +
                                                     ty * ((1 - tx) * at(y0 + 1, x0) + tx * at(y0 + 1, x0 + 1));
    }
  }
  return out;
}

struct Opacity {
  std::vector<double> smoke, cloud;
};

Opacity draw_opacity(Rng& rng, int height, int width) {
  const double S = std::min(height, width);
  Opacity op{std::vector<double>(static_cast<std::size_t>(height) * width, 0.0),
             std::vector<double>(static_cast<std::size_t>(height) * width, 0.0)};
  const int plumes = rng.uniform_int(1, 3);
  for (int p = 0; p < plumes; ++p) {
    const double cx = rng.uniform(0.0, width), cy = rng.uniform(0.0, height);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double s_long = std::max(1.0, rng.uniform(0.2, 0.4) * S);
    const double s_short = std::max(1.0, rng.uniform(0.08, 0.16) * S);
    const double amp = rng.uniform(0.7, 1.0);
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double dx = c + 0.5 - cx, dy = r + 0.5 - cy;
        const double u = ct * dx + st * dy, v = -st * dx + ct * dy;
        double& a = op.smoke[static_cast<std::size_t>(r) * width + c];
        a = std::min(1.0, a + amp * std::exp(-0.5 * (u * u / (s_long * s_long) + v * v / (s_short * s_short))));
      }
    }
  }
  const int clouds = rng.uniform_int(0, 2);
  for (int k = 0; k < clouds; ++k) {
    const double cx = rng.uniform(0.0, width), cy = rng.uniform(0.0, height);
    const double radius = std::max(1.5, rng.uniform(0.06, 0.15) * S);
    const double soft = std::max(1.0, 0.03 * S);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double d = std::hypot(c + 0.5 - cx, r + 0.5 - cy);
        double& a = op.cloud[static_cast<std::size_t>(r) * width + c];
        a = std::max(a, std::clamp((radius - d) / soft + 0.5, 0.0, 1.0));
      }
    }
  }
  return op;
}

LabelMask label_from_opacity(const Opacity& op, int height, int width, const SynthOptions& o) {
  LabelMask raw(height, width);
  for (std::size_t i = 0; i < raw.codes.size(); ++i) {
    PixelClass c = PixelClass::Gap;
    if (op.cloud[i] >= 0.5) {
      c = PixelClass::Cloud;
    } else if (op.smoke[i] >= 0.5) {
      c = PixelClass::Smoke;
    } else if (op.smoke[i] < o.clear_below && op.cloud[i] < o.clear_below) {
      c = PixelClass::Clear;
    }
    raw.codes[i] = static_cast<std::uint8_t>(c);
  }
  if (o.gap_margin <= 0) return raw;
  LabelMask out = raw;
  const int m = o.gap_margin;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const PixelClass self = raw.at(r, c);
      if (self == PixelClass::Gap) continue;
      bool near_other = false;
      for (int y = std::max(0, r - m); y <= std::min(height - 1, r + m) && !near_other; ++y) {
        for (int x = std::max(0, c - m); x <= std::min(width - 1, c + m); ++x) {
          const PixelClass other = raw.at(y, x);
          if (other != PixelClass::Gap && other != self) {
            near_other = true;
            break;
          }
        }
      }
      if (near_other) out.set(r, c, PixelClass::Gap);
    }
  }
  return out;
}

bool within_targets(const LabelMask& mask, const SynthOptions& o) {
  const double n = static_cast<double>(mask.codes.size());
  return o.smoke.contains(mask.count(PixelClass::Smoke) / n) && o.cloud.contains(mask.count(PixelClass::Cloud) / n) &&
         o.clear.contains(mask.count(PixelClass::Clear) / n);
}

std::string numbered(const char* stem, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d%s", stem, index, ext);
  return buf;
}

}  // namespace

SynthSample synth_sample(const SynthOptions& o, int index) {
  if (o.height <= 0 || o.width <= 0) throw ConfigError("synth: image size must be positive");
  Rng rng(mix_seed(o.seed, static_cast<std::uint64_t>(index)));
  for (int attempt = 0; attempt < o.max_attempts; ++attempt) {
    const Opacity op = draw_opacity(rng, o.height, o.width);
    LabelMask mask = label_from_opacity(op, o.height, o.width, o);
    if (!within_targets(mask, o)) continue;

    const std::vector<double> field = smooth_field(rng, o.height, o.width, 4);
    SynthSample s;
    s.raster.height = o.height;
    s.raster.width = o.width;
    s.raster.bands = kBandCount;
    s.raster.data.resize(static_cast<std::size_t>(o.height) * o.width * kBandCount);
    for (std::size_t i = 0; i < field.size(); ++i) {
      const double brightness = 0.8 + 0.4 * field[i];
      for (int b = 0; b < kBandCount; ++b) {
        double v = kLand[b] * brightness + rng.normal(0.0, 0.004);
        v = (1.0 - op.smoke[i]) * v + op.smoke[i] * kSmoke[b];
        v = (1.0 - op.cloud[i]) * v + op.cloud[i] * kCloud[b];
        s.raster.data[i * kBandCount + b] = static_cast<float>(std::max(0.0, v) * kScale);
      }
    }
    s.mask = std::move(mask);
    return s;
  }
  throw DataError("synth: scene " + std::to_string(index) + " missed the class-fraction targets in " +
                  std::to_string(o.max_attempts) + " draws");
}

DatasetManifest synth_generate(const fs::path& out_dir, const SynthOptions& o) {
  if (o.count < 1) throw ConfigError("synth: count must be at least 1");
  if (o.eval_fraction < 0.0 || o.eval_fraction >= 1.0) throw ConfigError("synth: eval_fraction must be in [0, 1)");
  fs::create_directories(out_dir);
  const int n_eval = static_cast<int>(std::floor(o.count * o.eval_fraction));
  DatasetManifest m;
  std::vector<fs::path> images;
  for (int i = 0; i < o.count; ++i) {
    const SynthSample s = synth_sample(o, i);
    const fs::path image = out_dir / numbered("image", i, ".mbr");
    const fs::path label = out_dir / numbered("label", i, ".png");
    write_raster(image, s.raster);
    write_png(label, mask_to_rgb(s.mask));
    m.entries.push_back({image, label, i >= o.count - n_eval ? Split::Eval : Split::Train});
    images.push_back(image);
  }
  m.metadata["generator"] = "synth";
  m.metadata["seed"] = std::to_string(o.seed);
  m.metadata["size"] = std::to_string(o.height) + "x" + std::to_string(o.width);
  m.metadata["gap_margin"] = std::to_string(o.gap_margin);
  m.metadata["clear_below"] = std::to_string(o.clear_below);
  m.metadata["band_max"] = dataset_band_max(images).to_string();
  write_manifest(out_dir / "manifest.tsv", m);
  return m;
}

}  // namespace smokeseg::imagery
