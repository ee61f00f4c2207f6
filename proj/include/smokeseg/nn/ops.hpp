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
#include <vector>

#include "smokeseg/nn/autograd.hpp"

// Differentiable tensor operations. Feature maps are [batch, height, width,
// channels]; token sequences are [batch, tokens, features]. Every op checks
// its shapes and throws GraphShapeError on mismatch.
namespace smokeseg::nn::ops {

Var add(const Var& a, const Var& b);
Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope);
Var sigmoid(const Var& x);

/// Concatenation along the last axis. All leading extents must agree.
Var concat_last(std::span<const Var> parts);

/// Affine map over the last axis: x[..., in] * weight[in, out] + bias[out].
/// `bias` may be undefined.
Var linear(const Var& x, const Var& weight, const Var& bias);

/// Stride-1 convolution with zero "same" padding. weight is
/// [k, k, in, out] with odd k; bias is [out] or undefined.
Var conv2d(const Var& x, const Var& weight, const Var& bias);

/// Transposed convolution with a 2x2 kernel and stride 2, doubling height
/// and width. weight is [in, 2, 2, out]; bias is [out].
Var conv_transpose2x2(const Var& x, const Var& weight, const Var& bias);

/// 2x2 max pooling with stride 2. Height and width must be even.
Var max_pool2x2(const Var& x);

/// Per-sample, per-channel normalisation over height and width, followed by
/// a per-channel affine transform.
Var instance_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

/// Normalisation over the last axis with affine transform.
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

/// Splits a map into region x region cells and emits one token per cell:
/// channel means followed by channel maxima, so the token width is 2C.
/// Tokens are ordered row-major over the cell grid.
Var region_tokens(const Var& x, int region);

/// Inverse layout of region_tokens: every pixel of a cell receives that
/// cell's token. Output is [batch, grid_rows*region, grid_cols*region, C].
Var region_broadcast(const Var& tokens, int grid_rows, int grid_cols, int region);

/// tokens[b, t, e] + table[t, e].
Var add_per_token(const Var& tokens, const Var& table);

/// Scaled dot-product self-attention. qkv is [batch, T, 3E] holding the
/// query, key and value projections side by side; returns [batch, T, E].
Var multi_head_attention(const Var& qkv, int heads);

/// Mean over height and width: [B, H, W, C] -> [B, C].
Var spatial_mean(const Var& x);

/// x[b, h, w, c] * factors[b, c].
Var scale_channels(const Var& x, const Var& factors);

/// Mean of squared differences over (labelled pixel, channel) pairs.
/// `labelled` has one entry per pixel of scores' leading three axes.
/// Returns zero when nothing is labelled.
Var masked_mse(const Var& scores, const Tensor& target, std::span<const std::uint8_t> labelled);

/// Sum of all elements (used by tests and diagnostics).
Var sum(const Var& x);

}  // namespace smokeseg::nn::ops
