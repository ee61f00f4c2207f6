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

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "smokeseg/nn/autograd.hpp"

namespace smokeseg::nn {

struct NamedParameter {
  std::string name;
  Var var;
};

/// Base for anything holding trainable tensors. Children are registered by
/// reference, so modules are neither copyable nor movable.
class Module {
 public:
  Module() = default;
  virtual ~Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;
  Module(Module&&) = delete;
  Module& operator=(Module&&) = delete;

  /// Depth-first list of parameters with dotted names ("left0.conv1.weight").
  std::vector<NamedParameter> named_parameters() const;
  std::vector<Var> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

 protected:
  Var register_parameter(std::string name, Tensor init);
  void register_module(std::string name, Module& child);

 private:
  void collect(const std::string& prefix, std::vector<NamedParameter>& out) const;

  std::vector<NamedParameter> params_;
  std::vector<std::pair<std::string, Module*>> children_;
};

}  // namespace smokeseg::nn
