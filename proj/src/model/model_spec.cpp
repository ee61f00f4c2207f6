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

#include "smokeseg/model/model_spec.hpp"

#include <algorithm>
#include <cctype>

#include "smokeseg/errors.hpp"

namespace smokeseg::model {

namespace {
constexpr const char* kAbsent = "()";
}

std::string to_string(MidModule mid) {
  switch (mid) {
    case MidModule::None:
      return kAbsent;
    case MidModule::TrUNet:
      return "TrUNet";
    case MidModule::UNet:
      return "UNet";
    case MidModule::UNetThenTrfB:
      return "UNet+TrfB";
  }
  return kAbsent;
}

std::string ModelSpec::canonical_name() const {
  return std::string(has_vc ? "VC" : kAbsent) + "-" + to_string(mid) + "-" + (has_cha ? "ChA" : kAbsent);
}

ModelSpec parse_model_name(const std::string& name) {
  auto fail = [&](const std::string& why) -> ModelNameError {
    return ModelNameError("invalid model name '" + name + "': " + why +
                          " (expected VC|()-TrUNet|UNet|UNet+TrfB|()-ChA|())");
  };
  std::string body = name;
  std::string id;
  if (const auto colon = body.find(':'); colon != std::string::npos) {
    id = body.substr(0, colon);
    if (id.empty() || !std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw fail("bad id prefix");
    }
    body = body.substr(colon + 1);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dash = body.find('-', start);
    parts.push_back(body.substr(start, dash == std::string::npos ? std::string::npos : dash - start));
    if (dash == std::string::npos) break;
    start = dash + 1;
  }
  if (parts.size() != 3) throw fail("expected three '-'-separated parts");

  ModelSpec spec;
  if (parts[0] == "VC") {
    spec.has_vc = true;
  } else if (parts[0] != kAbsent) {
    throw fail("unknown front module '" + parts[0] + "'");
  }
  if (parts[1] == "TrUNet") {
    spec.mid = MidModule::TrUNet;
  } else if (parts[1] == "UNet") {
    spec.mid = MidModule::UNet;
  } else if (parts[1] == "UNet+TrfB") {
    spec.mid = MidModule::UNetThenTrfB;
  } else if (parts[1] != kAbsent) {
    throw fail("unknown middle module '" + parts[1] + "'");
  }
  if (parts[2] == "ChA") {
    spec.has_cha = true;
  } else if (parts[2] != kAbsent) {
    throw fail("unknown back module '" + parts[2] + "'");
  }
  if (!id.empty() && std::to_string(grid_id(spec)) != id) throw fail("id " + id + " does not match the grid");
  return spec;
}

std::vector<ModelSpec> enumerate_ablation_grid() {
  return {
      {true, MidModule::TrUNet, false},         // 1: VC-TrUNet-()
      {true, MidModule::TrUNet, true},          // 2: VC-TrUNet-ChA
      {false, MidModule::TrUNet, false},        // 3: ()-TrUNet-()
      {true, MidModule::None, false},           // 4: VC-()-()
      {true, MidModule::None, true},            // 5: VC-()-ChA
      {true, MidModule::UNet, false},           // 6: VC-UNet-()
      {true, MidModule::UNetThenTrfB, false},   // 7: VC-UNet+TrfB-()
      {true, MidModule::UNetThenTrfB, true},    // 8: VC-UNet+TrfB-ChA
      {false, MidModule::None, false},          // 9: ()-()-(), the bare MLP
  };
}

int grid_id(const ModelSpec& spec) {
  const auto grid = enumerate_ablation_grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == spec) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::string display_name(const ModelSpec& spec) {
  const int id = grid_id(spec);
  return id ? std::to_string(id) + ":" + spec.canonical_name() : spec.canonical_name();
}

}  // namespace smokeseg::model
