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

#include "smokeseg/network/blocks.hpp"

#include <algorithm>
#include <array>

#include "smokeseg/errors.hpp"
#include "smokeseg/nn/ops.hpp"

namespace smokeseg::network {

using nn::Shape;
using nn::Var;
namespace ops = nn::ops;

ConvBlock::ConvBlock(int in_channels, int mid_channels, int out_channels, Activation act, Rng& rng)
    : act_(act),
      conv1_(in_channels, mid_channels, 3, /*bias=*/false, rng),
      conv2_(mid_channels, out_channels, 3, /*bias=*/false, rng),
      norm1_(mid_channels),
      norm2_(out_channels) {
  register_module("conv1", conv1_);
  register_module("norm1", norm1_);
  register_module("conv2", conv2_);
  register_module("norm2", norm2_);
}

Var ConvBlock::forward(const Var& x) const {
  Var h = activate(norm1_.forward(conv1_.forward(x)), act_);
  return activate(norm2_.forward(conv2_.forward(h)), act_);
}

Shape ConvBlock::output_shape(const Shape& in) const {
  return norm2_.output_shape(conv2_.output_shape(norm1_.output_shape(conv1_.output_shape(in))));
}

VirtualChannels::VirtualChannels(int in_bands, int branch_channels, int out_channels, Activation act, Rng& rng)
    : act_(act),
      s1_k1_(in_bands, branch_channels, 1, true, rng),
      s1_k3_(in_bands, branch_channels, 3, true, rng),
      s1_k5_(in_bands, branch_channels, 5, true, rng),
      s2_k1_(3 * branch_channels, branch_channels, 1, true, rng),
      s2_k3_(3 * branch_channels, branch_channels, 3, true, rng),
      s2_k5_(3 * branch_channels, branch_channels, 5, true, rng),
      fuse_(3 * branch_channels, out_channels, 1, true, rng) {
  register_module("stage1_k1", s1_k1_);
  register_module("stage1_k3", s1_k3_);
  register_module("stage1_k5", s1_k5_);
  register_module("stage2_k1", s2_k1_);
  register_module("stage2_k3", s2_k3_);
  register_module("stage2_k5", s2_k5_);
  register_module("fuse", fuse_);
}

Var VirtualChannels::stage(const Var& x, const nn::Conv2d& k1, const nn::Conv2d& k3, const nn::Conv2d& k5) const {
  const std::array<Var, 3> branches{k1.forward(x), k3.forward(x), k5.forward(x)};
  return activate(ops::concat_last(branches), act_);
}

Var VirtualChannels::forward(const Var& x) const {
  Var h = stage(x, s1_k1_, s1_k3_, s1_k5_);
  h = stage(h, s2_k1_, s2_k3_, s2_k5_);
  return fuse_.forward(h);
}

Shape VirtualChannels::output_shape(const Shape& in) const {
  auto stage_shape = [](const Shape& s, const nn::Conv2d& a, const nn::Conv2d& b, const nn::Conv2d& c) {
    Shape out = a.output_shape(s);
    out[3] += b.output_shape(s)[3] + c.output_shape(s)[3];
    return out;
  };
  Shape h = stage_shape(in, s1_k1_, s1_k3_, s1_k5_);
  h = stage_shape(h, s2_k1_, s2_k3_, s2_k5_);
  return fuse_.output_shape(h);
}

TransformerEncoderLayer::TransformerEncoderLayer(int embed_dim, int heads, int ff_width, Activation act, Rng& rng)
    : heads_(heads),
      act_(act),
      norm1_(embed_dim),
      norm2_(embed_dim),
      qkv_(embed_dim, 3 * embed_dim, rng),
      out_proj_(embed_dim, embed_dim, rng),
      ff1_(embed_dim, ff_width, rng),
      ff2_(ff_width, embed_dim, rng) {
  register_module("norm1", norm1_);
  register_module("qkv", qkv_);
  register_module("out_proj", out_proj_);
  register_module("norm2", norm2_);
  register_module("ff1", ff1_);
  register_module("ff2", ff2_);
}

Var TransformerEncoderLayer::forward(const Var& tokens) const {
  Var attended = out_proj_.forward(ops::multi_head_attention(qkv_.forward(norm1_.forward(tokens)), heads_));
  Var h = ops::add(tokens, attended);
  Var ff = ff2_.forward(activate(ff1_.forward(norm2_.forward(h)), act_));
  return ops::add(h, ff);
}

TransformerBlock::TransformerBlock(int channels, int height, int width, const BlockConfig& cfg, Rng& rng)
    : channels_(channels),
      height_(height),
      width_(width),
      region_(cfg.region_size),
      grid_rows_(0),
      grid_cols_(0),
      embed_(2 * channels, cfg.embed_dim, rng),
      final_norm_(cfg.embed_dim),
      project_(cfg.embed_dim, channels, rng) {
  if (region_ <= 0 || height_ % region_ != 0 || width_ % region_ != 0) {
    throw GraphShapeError("TransformerBlock: region " + std::to_string(region_) + " does not tile a " +
                          std::to_string(height_) + "x" + std::to_string(width_) + " map");
  }
  if (cfg.embed_dim % cfg.attention_heads != 0) {
    throw GraphShapeError("TransformerBlock: embed_dim not divisible by attention_heads");
  }
  grid_rows_ = height_ / region_;
  grid_cols_ = width_ / region_;
  register_module("embed", embed_);
  nn::Tensor table({token_count(), cfg.embed_dim});
  for (double& v : table.values()) v = rng.normal(0.0, 0.02);
  positional_ = register_parameter("positional", std::move(table));
  for (int i = 0; i < cfg.trfb_repeats; ++i) {
    layers_.push_back(std::make_unique<TransformerEncoderLayer>(cfg.embed_dim, cfg.attention_heads,
                                                                cfg.ff_multiplier * cfg.embed_dim, cfg.activation, rng));
    register_module("layer" + std::to_string(i), *layers_.back());
  }
  register_module("final_norm", final_norm_);
  register_module("project", project_);
}

Var TransformerBlock::forward(const Var& x) const {
  output_shape(x.shape());
  Var h = embed_.forward(ops::region_tokens(x, region_));
  h = ops::add_per_token(h, positional_);
  for (const auto& layer : layers_) h = layer->forward(h);
  Var cells = project_.forward(final_norm_.forward(h));
  return ops::region_broadcast(cells, grid_rows_, grid_cols_, region_);
}

Shape TransformerBlock::output_shape(const Shape& in) const {
  nn::expect_map("TransformerBlock", in, channels_);
  if (in[1] != height_ || in[2] != width_) {
    throw GraphShapeError("TransformerBlock: built for " + std::to_string(height_) + "x" + std::to_string(width_) +
                          ", got " + nn::to_string(in));
  }
  return in;
}

ChannelAttention::ChannelAttention(int channels, int reduction, Activation act, Rng& rng)
    : channels_(channels),
      act_(act),
      squeeze_(channels, std::max(1, channels / reduction), rng),
      excite_(std::max(1, channels / reduction), channels, rng) {
  register_module("squeeze", squeeze_);
  register_module("excite", excite_);
}

Var ChannelAttention::factors(const Var& x) const {
  output_shape(x.shape());
  return ops::sigmoid(excite_.forward(activate(squeeze_.forward(ops::spatial_mean(x)), act_)));
}

Var ChannelAttention::forward(const Var& x) const { return ops::scale_channels(x, factors(x)); }

Shape ChannelAttention::output_shape(const Shape& in) const {
  nn::expect_map("ChannelAttention", in, channels_);
  return in;
}

MlpHead::MlpHead(int in_channels, int hidden, int classes, Activation act, Rng& rng)
    : act_(act), fc1_(in_channels, hidden, rng), fc2_(hidden, classes, rng) {
  register_module("fc1", fc1_);
  register_module("fc2", fc2_);
}

Var MlpHead::forward(const Var& x) const {
  return ops::sigmoid(fc2_.forward(activate(fc1_.forward(x), act_)));
}

Shape MlpHead::output_shape(const Shape& in) const {
  if (in.size() != 4) throw GraphShapeError("MlpHead: expected a [B,H,W,C] map, got " + nn::to_string(in));
  return fc2_.output_shape(fc1_.output_shape(in));
}

}  // namespace smokeseg::network
