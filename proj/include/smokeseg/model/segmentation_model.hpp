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
#include <memory>
#include <string>
#include <vector>

#include "smokeseg/imagery/labels.hpp"
#include "smokeseg/model/model_spec.hpp"
#include "smokeseg/network/trunet.hpp"

namespace smokeseg::model {

struct ShapeAuditEntry {
  std::string block;
  nn::Shape input;
  nn::Shape output;
};

/// input(6 bands) -> [VC] -> [Mid] -> [ChA] -> MLP head -> 3 sigmoid scores.
///
/// Widths are checked while the graph is assembled: the feature width is
/// base_channels after VC and input_bands otherwise.
class SegmentationModel : public nn::Module {
 public:
  SegmentationModel(const ModelSpec& spec, const network::BlockConfig& cfg, std::uint64_t seed);

  /// [B, S, S, bands] -> [B, S, S, 3] with S = cfg.image_size.
  nn::Var forward(const nn::Var& images) const;
  /// Static shape trace of every block for a batch of `batch` images.
  std::vector<ShapeAuditEntry> audit(int batch = 1) const;

  const ModelSpec& spec() const noexcept { return spec_; }
  const network::BlockConfig& config() const noexcept { return cfg_; }
  int feature_channels() const noexcept { return width_; }

  const network::VirtualChannels* vc() const noexcept { return vc_.get(); }
  const network::TrUNet* unet() const noexcept { return unet_.get(); }
  const network::TransformerBlock* trailing_transformer() const noexcept { return trailing_trfb_.get(); }
  const network::ChannelAttention* channel_attention() const noexcept { return cha_.get(); }
  const network::MlpHead& head() const noexcept { return *head_; }

 private:
  ModelSpec spec_;
  network::BlockConfig cfg_;
  int width_;
  std::unique_ptr<network::VirtualChannels> vc_;
  std::unique_ptr<network::TrUNet> unet_;
  std::unique_ptr<network::TransformerBlock> trailing_trfb_;
  std::unique_ptr<network::ChannelAttention> cha_;
  std::unique_ptr<network::MlpHead> head_;
};

/// Per-pixel argmax over [B, H, W, 3] scores (Smoke, Cloud, Clear), ties
/// going to the lower channel. The result never contains Gap.
std::vector<imagery::LabelMask> predict_classes(const nn::Tensor& scores);

std::unique_ptr<SegmentationModel> build_model(const ModelSpec& spec, const network::BlockConfig& cfg,
                                               std::uint64_t seed);

}  // namespace smokeseg::model
