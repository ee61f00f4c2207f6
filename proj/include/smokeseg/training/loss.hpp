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
#include <span>
#include <string>
#include <vector>

#include "smokeseg/imagery/labels.hpp"
#include "smokeseg/nn/autograd.hpp"

namespace smokeseg::training {

/// Targets and loss mask for a batch of label masks.
struct Targets {
  nn::Tensor rgb;                       // [B, H, W, 3]: Smoke (1,0,0), Cloud (0,1,0), Clear (0,0,1), Gap zeros
  std::vector<std::uint8_t> labelled;   // one flag per pixel, 0 on Gap
};

Targets encode_targets(std::span<const imagery::LabelMask> masks);

/// Mean squared error over (labelled pixel, channel) pairs. Returns zero
/// when no pixel is labelled, appending a note to `warnings` if given.
nn::Var masked_mse_loss(const nn::Var& scores, const nn::Tensor& target_rgb, std::span<const std::uint8_t> labelled,
                        std::vector<std::string>* warnings = nullptr);

}  // namespace smokeseg::training
