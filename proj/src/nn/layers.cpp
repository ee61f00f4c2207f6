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

#include "smokeseg/nn/layers.hpp"

#include <cmath>

#include "smokeseg/errors.hpp"
#include "smokeseg/nn/ops.hpp"

namespace smokeseg::nn {

namespace {

Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.normal(0.0, stddev);
  return t;
}

}  // namespace

void expect_map(const std::string& where, const Shape& shape, int channels) {
  if (shape.size() != 4 || shape[3] != channels) {
    throw GraphShapeError(where + ": expected [B,H,W," + std::to_string(channels) + "], got " + to_string(shape));
  }
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, bool bias, Rng& rng)
    : in_(in_channels), out_(out_channels), kernel_(kernel) {
  if (in_ <= 0 || out_ <= 0 || kernel_ <= 0 || kernel_ % 2 == 0) {
    throw GraphShapeError("Conv2d: invalid geometry " + std::to_string(in_) + "->" + std::to_string(out_) + " k" +
                          std::to_string(kernel_));
  }
  // He initialisation for ReLU networks.
  const double stddev = std::sqrt(2.0 / (kernel_ * kernel_ * in_));
  weight_ = register_parameter("weight", normal_tensor({kernel_, kernel_, in_, out_}, stddev, rng));
  if (bias) bias_ = register_parameter("bias", Tensor({out_}, 0.0));
}

Var Conv2d::forward(const Var& x) const { return ops::conv2d(x, weight_, bias_); }

Shape Conv2d::output_shape(const Shape& in) const {
  expect_map("Conv2d", in, in_);
  return {in[0], in[1], in[2], out_};
}

ConvTranspose2x2::ConvTranspose2x2(int in_channels, int out_channels, Rng& rng)
    : in_(in_channels), out_(out_channels) {
  const double stddev = std::sqrt(2.0 / in_);
  weight_ = register_parameter("weight", normal_tensor({in_, 2, 2, out_}, stddev, rng));
  bias_ = register_parameter("bias", Tensor({out_}, 0.0));
}

Var ConvTranspose2x2::forward(const Var& x) const { return ops::conv_transpose2x2(x, weight_, bias_); }

Shape ConvTranspose2x2::output_shape(const Shape& in) const {
  expect_map("ConvTranspose2x2", in, in_);
  return {in[0], 2 * in[1], 2 * in[2], out_};
}

Linear::Linear(int in_features, int out_features, Rng& rng, bool bias) : in_(in_features), out_(out_features) {
  if (in_ <= 0 || out_ <= 0) throw GraphShapeError("Linear: invalid widths");
  const double stddev = std::sqrt(1.0 / in_);
  weight_ = register_parameter("weight", normal_tensor({in_, out_}, stddev, rng));
  if (bias) bias_ = register_parameter("bias", Tensor({out_}, 0.0));
}

Var Linear::forward(const Var& x) const { return ops::linear(x, weight_, bias_); }

Shape Linear::output_shape(const Shape& in) const {
  if (in.empty() || in.back() != in_) {
    throw GraphShapeError("Linear: expected trailing width " + std::to_string(in_) + ", got " + to_string(in));
  }
  Shape out = in;
  out.back() = out_;
  return out;
}

InstanceNorm::InstanceNorm(int channels) : channels_(channels) {
  gamma_ = register_parameter("gamma", Tensor({channels_}, 1.0));
  beta_ = register_parameter("beta", Tensor({channels_}, 0.0));
}

Var InstanceNorm::forward(const Var& x) const { return ops::instance_norm(x, gamma_, beta_); }

Shape InstanceNorm::output_shape(const Shape& in) const {
  expect_map("InstanceNorm", in, channels_);
  return in;
}

LayerNorm::LayerNorm(int features) : features_(features) {
  gamma_ = register_parameter("gamma", Tensor({features_}, 1.0));
  beta_ = register_parameter("beta", Tensor({features_}, 0.0));
}

Var LayerNorm::forward(const Var& x) const { return ops::layer_norm(x, gamma_, beta_); }

Shape LayerNorm::output_shape(const Shape& in) const {
  if (in.empty() || in.back() != features_) {
    throw GraphShapeError("LayerNorm: expected trailing width " + std::to_string(features_) + ", got " + to_string(in));
  }
  return in;
}

}  // namespace smokeseg::nn
