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

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "smokeseg/model/segmentation_model.hpp"

namespace smokeseg::model {

/// Free-form training provenance stored alongside the weights
/// ("session", "epoch", "band_max", ...).
using Provenance = std::map<std::string, std::string>;

struct Checkpoint {
  std::unique_ptr<SegmentationModel> model;
  Provenance provenance;
};

/// Layout: "SSCK", u32 version, u64 header length, UTF-8 JSON header (model
/// name, block config, parameter names and shapes, provenance), then every
/// parameter as little-endian float64 in header order.
///
/// The file is written next to its destination and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const SegmentationModel& model,
                     const Provenance& provenance = {});

/// Rebuilds the model from the header and restores every parameter
/// bit-exactly. Throws IoError / DataIntegrityError on damaged files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace smokeseg::model
