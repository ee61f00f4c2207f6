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

#include "smokeseg/model/segmentation_model.hpp"

#include "smokeseg/errors.hpp"
#include "smokeseg/nn/ops.hpp"

namespace smokeseg::model {

using nn::Shape;
using nn::Var;

namespace {
constexpr int kClasses = 3;
}

SegmentationModel::SegmentationModel(const ModelSpec& spec, const network::BlockConfig& cfg, std::uint64_t seed)
    : spec_(spec), cfg_(cfg), width_(cfg.input_bands) {
  cfg_.validate();
  Rng rng(seed);
  if (spec_.has_vc) {
    vc_ = std::make_unique<network::VirtualChannels>(cfg_.input_bands, cfg_.vc_branch_channels, cfg_.base_channels,
                                                     cfg_.activation, rng);
    register_module("vc", *vc_);
    width_ = vc_->out_channels();
  }
  switch (spec_.mid) {
    case MidModule::None:
      break;
    case MidModule::TrUNet:
    case MidModule::UNet:
    case MidModule::UNetThenTrfB:
      unet_ = std::make_unique<network::TrUNet>(width_, cfg_, spec_.mid == MidModule::TrUNet, rng);
      register_module(spec_.mid == MidModule::TrUNet ? "trunet" : "unet", *unet_);
      break;
  }
  if (spec_.mid == MidModule::UNetThenTrfB) {
    trailing_trfb_ = std::make_unique<network::TransformerBlock>(width_, cfg_.image_size, cfg_.image_size, cfg_, rng);
    register_module("trfb", *trailing_trfb_);
  }
  if (spec_.has_cha) {
    cha_ = std::make_unique<network::ChannelAttention>(width_, cfg_.cha_reduction, cfg_.activation, rng);
    register_module("cha", *cha_);
  }
  head_ = std::make_unique<network::MlpHead>(width_, cfg_.mlp_hidden, kClasses, cfg_.activation, rng);
  register_module("head", *head_);
  audit();
}

Var SegmentationModel::forward(const Var& images) const {
  nn::expect_map("SegmentationModel input", images.shape(), cfg_.input_bands);
  if (images.shape()[1] != cfg_.image_size || images.shape()[2] != cfg_.image_size) {
    throw GraphShapeError("SegmentationModel: built for " + std::to_string(cfg_.image_size) + "x" +
                          std::to_string(cfg_.image_size) + " tiles, got " + nn::to_string(images.shape()));
  }
  Var h = images;
  if (vc_) h = vc_->forward(h);
  if (unet_) h = unet_->forward(h);
  // The trailing transformer is added onto the UNet output so pixel detail
  // survives the region broadcast.
  if (trailing_trfb_) h = nn::ops::add(h, trailing_trfb_->forward(h));
  if (cha_) h = cha_->forward(h);
  return head_->forward(h);
}

std::vector<ShapeAuditEntry> SegmentationModel::audit(int batch) const {
  std::vector<ShapeAuditEntry> trace;
  Shape h{batch, cfg_.image_size, cfg_.image_size, cfg_.input_bands};
  auto step = [&](const std::string& name, const Shape& out) {
    trace.push_back({name, h, out});
    h = out;
  };
  if (vc_) step("VC", vc_->output_shape(h));
  if (unet_) step(unet_->with_transformer() ? "TrUNet" : "UNet", unet_->output_shape(h));
  if (trailing_trfb_) step("TrfB", trailing_trfb_->output_shape(h));
  if (cha_) step("ChA", cha_->output_shape(h));
  step("MLP", head_->output_shape(h));
  if (h != Shape{batch, cfg_.image_size, cfg_.image_size, kClasses}) {
    throw GraphShapeError("SegmentationModel: graph ends in " + nn::to_string(h));
  }
  return trace;
}

std::vector<imagery::LabelMask> predict_classes(const nn::Tensor& scores) {
  if (scores.rank() != 4 || scores.dim(3) != kClasses) {
    throw GraphShapeError("predict_classes: expected [B, H, W, 3] scores, got " + nn::to_string(scores.shape()));
  }
  const int B = scores.dim(0), H = scores.dim(1), W = scores.dim(2);
  std::vector<imagery::LabelMask> out(B, imagery::LabelMask(H, W));
  const double* s = scores.data();
  for (int b = 0; b < B; ++b) {
    auto& codes = out[b].codes;
    for (std::size_t i = 0; i < codes.size(); ++i, s += kClasses) {
      int best = 0;
      for (int c = 1; c < kClasses; ++c) {
        if (s[c] > s[best]) best = c;
      }
      codes[i] = static_cast<std::uint8_t>(imagery::kLabelledClasses[best]);
    }
  }
  return out;
}

std::unique_ptr<SegmentationModel> build_model(const ModelSpec& spec, const network::BlockConfig& cfg,
                                               std::uint64_t seed) {
  return std::make_unique<SegmentationModel>(spec, cfg, seed);
}

}  // namespace smokeseg::model
