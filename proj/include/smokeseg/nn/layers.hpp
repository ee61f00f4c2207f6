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

#include "smokeseg/nn/module.hpp"
#include "smokeseg/random.hpp"

namespace smokeseg::nn {

// Each layer offers forward() and output_shape(); the latter runs the same
// shape checks without touching data, so whole graphs can be audited
// before any allocation happens.

class Conv2d : public Module {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, bool bias, Rng& rng);
  Var forward(const Var& x) const;
  Shape output_shape(const Shape& in) const;
  int in_channels() const noexcept { return in_; }
  int out_channels() const noexcept { return out_; }

 private:
  int in_, out_, kernel_;
  Var weight_, bias_;
};

class ConvTranspose2x2 : public Module {
 public:
  ConvTranspose2x2(int in_channels, int out_channels, Rng& rng);
  Var forward(const Var& x) const;
  Shape output_shape(const Shape& in) const;

 private:
  int in_, out_;
  Var weight_, bias_;
};

class Linear : public Module {
 public:
  Linear(int in_features, int out_features, Rng& rng, bool bias = true);
  Var forward(const Var& x) const;
  Shape output_shape(const Shape& in) const;
  int in_features() const noexcept { return in_; }
  int out_features() const noexcept { return out_; }

 private:
  int in_, out_;
  Var weight_, bias_;
};

class InstanceNorm : public Module {
 public:
  explicit InstanceNorm(int channels);
  Var forward(const Var& x) const;
  Shape output_shape(const Shape& in) const;

 private:
  int channels_;
  Var gamma_, beta_;
};

class LayerNorm : public Module {
 public:
  explicit LayerNorm(int features);
  Var forward(const Var& x) const;
  Shape output_shape(const Shape& in) const;

 private:
  int features_;
  Var gamma_, beta_;
};

/// Throws GraphShapeError unless `shape` is rank 4 with `channels` channels.
void expect_map(const std::string& where, const Shape& shape, int channels);

}  // namespace smokeseg::nn
