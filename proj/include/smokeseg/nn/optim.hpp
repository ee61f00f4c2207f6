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

#include <vector>

#include "smokeseg/nn/autograd.hpp"

namespace smokeseg::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. The learning rate is passed per step so an
/// external schedule can own it.
class Adam {
 public:
  explicit Adam(std::vector<Var> params, AdamOptions options = {});

  /// Applies one update from the gradients currently stored on the
  /// parameters, then clears them.
  void step(double learning_rate);
  long steps_taken() const noexcept { return t_; }

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_, v_;
  AdamOptions opt_;
  long t_ = 0;
};

}  // namespace smokeseg::nn
