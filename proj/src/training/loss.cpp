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

#include "smokeseg/training/loss.hpp"

#include <algorithm>

#include "smokeseg/errors.hpp"
#include "smokeseg/nn/ops.hpp"

namespace smokeseg::training {

Targets encode_targets(std::span<const imagery::LabelMask> masks) {
  if (masks.empty()) throw PairingError("encode_targets: empty batch");
  const int H = masks[0].height, W = masks[0].width;
  Targets t{nn::Tensor({static_cast<int>(masks.size()), H, W, 3}), {}};
  t.labelled.reserve(masks.size() * static_cast<std::size_t>(H) * W);
  double* dst = t.rgb.data();
  for (const auto& m : masks) {
    if (m.height != H || m.width != W) throw PairingError("encode_targets: masks differ in size");
    for (std::uint8_t code : m.codes) {
      const auto cls = static_cast<imagery::PixelClass>(code);
      if (cls != imagery::PixelClass::Gap) dst[code - 1] = 1.0;
      t.labelled.push_back(cls != imagery::PixelClass::Gap);
      dst += 3;
    }
  }
  return t;
}

nn::Var masked_mse_loss(const nn::Var& scores, const nn::Tensor& target_rgb, std::span<const std::uint8_t> labelled,
                        std::vector<std::string>* warnings) {
  if (scores.shape() != target_rgb.shape()) {
    throw PairingError("masked_mse_loss: scores " + nn::to_string(scores.shape()) + " vs targets " +
                       nn::to_string(target_rgb.shape()));
  }
  if (warnings && std::none_of(labelled.begin(), labelled.end(), [](std::uint8_t v) { return v != 0; })) {
    warnings->push_back("masked_mse_loss: batch has no labelled pixels, loss is 0");
  }
  return nn::ops::masked_mse(scores, target_rgb, labelled);
}

}  // namespace smokeseg::training
