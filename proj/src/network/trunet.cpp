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

#include "smokeseg/network/trunet.hpp"

#include "smokeseg/errors.hpp"
#include "smokeseg/nn/ops.hpp"

namespace smokeseg::network {

using nn::Shape;
using nn::Var;

TrUNet::TrUNet(int io_channels, const BlockConfig& cfg, bool with_transformer, Rng& rng)
    : io_channels_(io_channels), with_transformer_(with_transformer), image_size_(cfg.image_size) {
  cfg.validate();
  const int levels = cfg.unet_levels;
  for (int l = 0; l < levels; ++l) {
    const int width = cfg.level_channels(l);
    const int in = l == 0 ? io_channels : cfg.level_channels(l - 1);
    left_.push_back(std::make_unique<ConvBlock>(in, width, width, cfg.activation, rng));
    register_module("left" + std::to_string(l), *left_.back());
    if (with_transformer) {
      trfb_.push_back(std::make_unique<TransformerBlock>(width, cfg.level_size(l), cfg.level_size(l), cfg, rng));
      register_module("trfb" + std::to_string(l), *trfb_.back());
    }
  }
  for (int l = 0; l < levels; ++l) {
    const int width = cfg.level_channels(l);
    const bool has_lower = l + 1 < levels;
    if (has_lower) {
      up_.push_back(std::make_unique<nn::ConvTranspose2x2>(cfg.level_channels(l + 1), width, rng));
      register_module("up" + std::to_string(l), *up_.back());
    }
    const int concat = width * (with_transformer ? 2 : 1) + (has_lower ? width : 0);
    const int out = l == 0 ? io_channels : width;
    right_.push_back(std::make_unique<ConvBlock>(concat, width, out, cfg.activation, rng));
    register_module("right" + std::to_string(l), *right_.back());
  }
}

Var TrUNet::forward(const Var& x) const {
  output_shape(x.shape());
  const int levels = this->levels();
  std::vector<Var> skips;
  Var h = x;
  for (int l = 0; l < levels; ++l) {
    h = left_[l]->forward(h);
    skips.push_back(h);
    if (l + 1 < levels) h = nn::ops::max_pool2x2(h);
  }
  Var below;
  for (int l = levels - 1; l >= 0; --l) {
    std::vector<Var> parts;
    if (with_transformer_) parts.push_back(trfb_[l]->forward(skips[l]));
    parts.push_back(skips[l]);
    if (below.defined()) parts.push_back(up_[l]->forward(below));
    below = right_[l]->forward(nn::ops::concat_last(parts));
    skips[l] = Var();
  }
  return below;
}

std::vector<Shape> TrUNet::encoder_shapes(const Shape& in) const {
  nn::expect_map("TrUNet", in, io_channels_);
  if (in[1] != image_size_ || in[2] != image_size_) {
    throw GraphShapeError("TrUNet: built for " + std::to_string(image_size_) + "x" + std::to_string(image_size_) +
                          " input, got " + nn::to_string(in));
  }
  std::vector<Shape> shapes;
  Shape h = in;
  for (int l = 0; l < levels(); ++l) {
    h = left_[l]->output_shape(h);
    shapes.push_back(h);
    if (l + 1 < levels()) h = {h[0], h[1] / 2, h[2] / 2, h[3]};
  }
  return shapes;
}

Shape TrUNet::output_shape(const Shape& in) const {
  const auto skips = encoder_shapes(in);
  Shape below;
  for (int l = levels() - 1; l >= 0; --l) {
    Shape cat = skips[l];
    if (with_transformer_) cat[3] += trfb_[l]->output_shape(skips[l])[3];
    if (!below.empty()) {
      const Shape up = up_[l]->output_shape(below);
      if (up[1] != cat[1] || up[2] != cat[2]) {
        throw GraphShapeError("TrUNet: upsampled " + nn::to_string(up) + " does not meet skip " + nn::to_string(skips[l]));
      }
      cat[3] += up[3];
    }
    below = right_[l]->output_shape(cat);
  }
  return below;
}

}  // namespace smokeseg::network
