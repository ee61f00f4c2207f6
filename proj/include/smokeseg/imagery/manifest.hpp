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
#include <string>
#include <vector>

namespace smokeseg::imagery {

enum class Split { Train, Eval };

std::string to_string(Split split);
Split parse_split(const std::string& text);

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path label;  // empty when the image is unlabelled
  Split split = Split::Train;
};

/// Text form: one "image<TAB>label<TAB>split" line per entry, with "-" for a
/// missing label, plus "# key=value" metadata lines. Relative paths are
/// resolved against the manifest's directory.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::map<std::string, std::string> metadata;

  std::vector<ManifestEntry> split(Split which) const;
};

/// Parses and validates: every referenced file exists and every eval entry
/// has a label. Paths in the result are absolute or relative to the working
/// directory. Throws IoError or DataIntegrityError.
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Writes paths relative to the manifest's directory where possible.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

}  // namespace smokeseg::imagery
