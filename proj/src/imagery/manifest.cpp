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

#include "smokeseg/imagery/manifest.hpp"

#include <fstream>
#include <sstream>

#include "smokeseg/errors.hpp"

namespace smokeseg::imagery {

namespace fs = std::filesystem;

std::string to_string(Split split) { return split == Split::Train ? "train" : "eval"; }

Split parse_split(const std::string& text) {
  if (text == "train") return Split::Train;
  if (text == "eval") return Split::Eval;
  throw DataIntegrityError("unknown split '" + text + "' (expected train or eval)");
}

std::vector<ManifestEntry> DatasetManifest::split(Split which) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == which) out.push_back(e);
  }
  return out;
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  DatasetManifest m;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path.string() + ":" + std::to_string(number);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      m.metadata[key] = line.substr(eq + 1);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 3) throw DataIntegrityError(where + ": expected image<TAB>label<TAB>split");
    ManifestEntry e;
    e.image = base / fields[0];
    if (fields[1] != "-") e.label = base / fields[1];
    e.split = parse_split(fields[2]);
    if (!fs::exists(e.image)) throw IoError(where + ": missing image " + e.image.string());
    if (!e.label.empty() && !fs::exists(e.label)) throw IoError(where + ": missing label " + e.label.string());
    if (e.split == Split::Eval && e.label.empty()) throw DataIntegrityError(where + ": eval entries need a label");
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  auto relative = [&](const fs::path& p) {
    const fs::path rel = p.lexically_proximate(base);
    return rel.empty() ? p.generic_string() : rel.generic_string();
  };
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& [k, v] : manifest.metadata) out << "# " << k << "=" << v << "\n";
  for (const auto& e : manifest.entries) {
    out << relative(e.image) << '\t' << (e.label.empty() ? std::string("-") : relative(e.label)) << '\t'
        << to_string(e.split) << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path.string());
}

}  // namespace smokeseg::imagery
