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

#include "smokeseg/network/block_config.hpp"

#include <array>
#include <charconv>

#include "smokeseg/errors.hpp"
#include "smokeseg/nn/ops.hpp"

namespace smokeseg::network {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::LeakyRelu:
      return "leaky_relu";
  }
  return "relu";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "leaky_relu") return Activation::LeakyRelu;
  throw ConfigError("unknown activation '" + name + "' (expected relu or leaky_relu)");
}

nn::Var activate(const nn::Var& x, Activation a) {
  switch (a) {
    case Activation::Relu:
      return nn::ops::relu(x);
    case Activation::LeakyRelu:
      return nn::ops::leaky_relu(x, 0.01);
  }
  return nn::ops::relu(x);
}

void BlockConfig::validate() const {
  auto fail = [](const std::string& msg) { throw GraphShapeError("BlockConfig: " + msg); };
  if (image_size <= 0) fail("image_size must be positive");
  if (input_bands <= 0) fail("input_bands must be positive");
  if (base_channels <= 0) fail("base_channels must be positive");
  if (unet_levels < 1) fail("unet_levels must be >= 1");
  if (trfb_repeats < 1) fail("trfb_repeats must be >= 1");
  if (region_size < 1) fail("region_size must be >= 1");
  if (attention_heads < 1 || embed_dim < 1 || embed_dim % attention_heads != 0) {
    fail("embed_dim " + std::to_string(embed_dim) + " is not divisible by " + std::to_string(attention_heads) + " heads");
  }
  if (ff_multiplier < 1 || vc_branch_channels < 1 || mlp_hidden < 1 || cha_reduction < 1) {
    fail("widths and multipliers must be positive");
  }
  for (int level = 0; level < unet_levels; ++level) {
    if ((image_size >> level) << level != image_size) {
      fail("image_size " + std::to_string(image_size) + " cannot be halved " + std::to_string(unet_levels - 1) + " times");
    }
    if (level_size(level) % region_size != 0) {
      fail("region_size " + std::to_string(region_size) + " does not divide level " + std::to_string(level) +
           " edge " + std::to_string(level_size(level)));
    }
  }
}

namespace {

struct IntField {
  const char* name;
  int BlockConfig::*member;
};

constexpr std::array<IntField, 12> kIntFields{{
    {"image_size", &BlockConfig::image_size},
    {"input_bands", &BlockConfig::input_bands},
    {"base_channels", &BlockConfig::base_channels},
    {"unet_levels", &BlockConfig::unet_levels},
    {"trfb_repeats", &BlockConfig::trfb_repeats},
    {"region_size", &BlockConfig::region_size},
    {"attention_heads", &BlockConfig::attention_heads},
    {"embed_dim", &BlockConfig::embed_dim},
    {"ff_multiplier", &BlockConfig::ff_multiplier},
    {"vc_branch_channels", &BlockConfig::vc_branch_channels},
    {"mlp_hidden", &BlockConfig::mlp_hidden},
    {"cha_reduction", &BlockConfig::cha_reduction},
}};

}  // namespace

std::vector<std::pair<std::string, std::string>> to_fields(const BlockConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : kIntFields) out.emplace_back(f.name, std::to_string(cfg.*f.member));
  out.emplace_back("activation", to_string(cfg.activation));
  return out;
}

bool set_field(BlockConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "activation") {
    cfg.activation = parse_activation(value);
    return true;
  }
  for (const auto& f : kIntFields) {
    if (key != f.name) continue;
    int parsed = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || end != value.data() + value.size()) {
      throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
    cfg.*f.member = parsed;
    return true;
  }
  return false;
}

bool operator==(const BlockConfig& a, const BlockConfig& b) {
  return a.image_size == b.image_size && a.input_bands == b.input_bands && a.base_channels == b.base_channels &&
         a.unet_levels == b.unet_levels && a.trfb_repeats == b.trfb_repeats && a.region_size == b.region_size &&
         a.attention_heads == b.attention_heads && a.embed_dim == b.embed_dim && a.ff_multiplier == b.ff_multiplier &&
         a.vc_branch_channels == b.vc_branch_channels && a.mlp_hidden == b.mlp_hidden &&
         a.cha_reduction == b.cha_reduction && a.activation == b.activation;
}

}  // namespace smokeseg::network
