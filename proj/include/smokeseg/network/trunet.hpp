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

#include "smokeseg/network/blocks.hpp"

namespace smokeseg::network {

/// UNet whose every level can carry a transformer path next to the skip.
///
/// Level l works at (image_size >> l) with (base_channels << l) channels.
/// Encoder: left ConvBlock, then 2x2 max pooling into the next level.
/// Decoder: [TrfB(left), left, upsampled lower level] are concatenated and
/// fed to the right ConvBlock. With the transformer disabled the same graph
/// is a classic UNet (skip concat only). Input and output both carry
/// `io_channels` channels.
class TrUNet : public nn::Module {
 public:
  TrUNet(int io_channels, const BlockConfig& cfg, bool with_transformer, Rng& rng);

  nn::Var forward(const nn::Var& x) const;
  nn::Shape output_shape(const nn::Shape& in) const;
  /// Shapes of the left ConvBlock outputs, level 0 first.
  std::vector<nn::Shape> encoder_shapes(const nn::Shape& in) const;

  bool with_transformer() const noexcept { return with_transformer_; }
  int levels() const noexcept { return static_cast<int>(left_.size()); }
  /// Transformer block of `level`; requires with_transformer().
  const TransformerBlock& transformer(int level) const { return *trfb_[static_cast<std::size_t>(level)]; }

 private:
  int io_channels_;
  bool with_transformer_;
  int image_size_;
  std::vector<std::unique_ptr<ConvBlock>> left_;
  std::vector<std::unique_ptr<TransformerBlock>> trfb_;
  std::vector<std::unique_ptr<nn::ConvTranspose2x2>> up_;  // up_[l] lifts level l+1 into level l
  std::vector<std::unique_ptr<ConvBlock>> right_;
};

}  // namespace smokeseg::network
