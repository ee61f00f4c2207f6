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

#include <memory>
#include <vector>

#include "smokeseg/network/block_config.hpp"
#include "smokeseg/nn/layers.hpp"

namespace smokeseg::network {

/// Two same-padded 3x3 convolutions, each followed by instance
/// normalisation and the activation. in -> mid -> out channels.
class ConvBlock : public nn::Module {
 public:
  ConvBlock(int in_channels, int mid_channels, int out_channels, Activation act, Rng& rng);
  nn::Var forward(const nn::Var& x) const;
  nn::Shape output_shape(const nn::Shape& in) const;

 private:
  Activation act_;
  nn::Conv2d conv1_, conv2_;
  nn::InstanceNorm norm1_, norm2_;
};

/// Virtual channel construction. Two stages of parallel 1x1/3x3/5x5
/// convolutions (branch outputs concatenated, activation after each stage),
/// then a 1x1 fusion to `out_channels`. Resolution is preserved.
class VirtualChannels : public nn::Module {
 public:
  VirtualChannels(int in_bands, int branch_channels, int out_channels, Activation act, Rng& rng);
  nn::Var forward(const nn::Var& x) const;
  nn::Shape output_shape(const nn::Shape& in) const;
  int out_channels() const noexcept { return fuse_.out_channels(); }

 private:
  nn::Var stage(const nn::Var& x, const nn::Conv2d& k1, const nn::Conv2d& k3, const nn::Conv2d& k5) const;

  Activation act_;
  nn::Conv2d s1_k1_, s1_k3_, s1_k5_;
  nn::Conv2d s2_k1_, s2_k3_, s2_k5_;
  nn::Conv2d fuse_;
};

/// Pre-norm transformer encoder layer: x + MHA(LN(x)), then x + FF(LN(x)).
class TransformerEncoderLayer : public nn::Module {
 public:
  TransformerEncoderLayer(int embed_dim, int heads, int ff_width, Activation act, Rng& rng);
  nn::Var forward(const nn::Var& tokens) const;

 private:
  int heads_;
  Activation act_;
  nn::LayerNorm norm1_, norm2_;
  nn::Linear qkv_, out_proj_, ff1_, ff2_;
};

/// Region-token transformer block (TrfB) for a fixed map geometry.
///
/// The map is cut into region x region cells; each cell becomes a token of
/// its channel means and maxima (width 2C), which is embedded, offset by a
/// learned positional table, run through `trfb_repeats` encoder layers,
/// projected back to C channels and broadcast over its cell.
class TransformerBlock : public nn::Module {
 public:
  TransformerBlock(int channels, int height, int width, const BlockConfig& cfg, Rng& rng);
  nn::Var forward(const nn::Var& x) const;
  nn::Shape output_shape(const nn::Shape& in) const;

  int token_count() const noexcept { return grid_rows_ * grid_cols_; }
  int token_width() const noexcept { return 2 * channels_; }
  int grid_rows() const noexcept { return grid_rows_; }
  int grid_cols() const noexcept { return grid_cols_; }
  int region() const noexcept { return region_; }
  /// [tokens, embed_dim] table; its value can be edited in place.
  nn::Var positional_embedding() const { return positional_; }

 private:
  int channels_, height_, width_, region_;
  int grid_rows_, grid_cols_;
  nn::Linear embed_;
  nn::Var positional_;
  std::vector<std::unique_ptr<TransformerEncoderLayer>> layers_;
  nn::LayerNorm final_norm_;
  nn::Linear project_;
};

/// Squeeze-and-excitation style channel gating: global mean pool, a
/// bottleneck MLP and a sigmoid give one factor in (0, 1) per channel.
class ChannelAttention : public nn::Module {
 public:
  ChannelAttention(int channels, int reduction, Activation act, Rng& rng);
  nn::Var forward(const nn::Var& x) const;
  /// The [B, C] gating factors for `x`.
  nn::Var factors(const nn::Var& x) const;
  nn::Shape output_shape(const nn::Shape& in) const;

 private:
  int channels_;
  Activation act_;
  nn::Linear squeeze_, excite_;
};

/// Per-pixel two-layer perceptron with sigmoid scores. Output channel 0 is
/// Smoke, 1 Cloud, 2 Clear.
class MlpHead : public nn::Module {
 public:
  MlpHead(int in_channels, int hidden, int classes, Activation act, Rng& rng);
  nn::Var forward(const nn::Var& x) const;
  nn::Shape output_shape(const nn::Shape& in) const;

 private:
  Activation act_;
  nn::Linear fc1_, fc2_;
};

}  // namespace smokeseg::network
