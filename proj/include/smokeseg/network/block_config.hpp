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

#include <string>
#include <utility>
#include <vector>

#include "smokeseg/nn/autograd.hpp"

namespace smokeseg::network {

enum class Activation { Relu, LeakyRelu };

std::string to_string(Activation a);
/// Accepts "relu" and "leaky_relu"; throws ConfigError otherwise.
Activation parse_activation(const std::string& name);
nn::Var activate(const nn::Var& x, Activation a);

/// Geometry shared by every block of a model.
struct BlockConfig {
  int image_size = 256;          // square input edge the model is built for
  int input_bands = 6;
  int base_channels = 64;        // level-0 UNet width and VC output width
  int unet_levels = 4;
  int trfb_repeats = 6;          // encoder layers per transformer block
  int region_size = 8;           // token cell edge, in feature cells, at every level
  int attention_heads = 4;
  int embed_dim = 128;
  int ff_multiplier = 4;         // feed-forward width = ff_multiplier * embed_dim
  int vc_branch_channels = 32;   // per-kernel branch width inside VC
  int mlp_hidden = 64;
  int cha_reduction = 8;         // bottleneck divisor of channel attention
  Activation activation = Activation::Relu;

  /// Spatial edge of UNet level `level`.
  int level_size(int level) const { return image_size >> level; }
  int level_channels(int level) const { return base_channels << level; }

  /// Throws GraphShapeError when the geometry cannot be wired.
  void validate() const;
};

bool operator==(const BlockConfig& a, const BlockConfig& b);

/// Every field as (name, value) text in declaration order.
std::vector<std::pair<std::string, std::string>> to_fields(const BlockConfig& cfg);
/// Sets the named field from text. Returns false for an unknown name and
/// throws ConfigError for an unparsable value.
bool set_field(BlockConfig& cfg, const std::string& key, const std::string& value);

}  // namespace smokeseg::network
