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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smokeseg/imagery/synth.hpp"
#include "smokeseg/network/block_config.hpp"
#include "smokeseg/training/schedule.hpp"

namespace smokeseg::cli {

struct KeyInfo {
  std::string name;
  std::string default_value;  // empty means "unset"
  std::string help;
};

/// Every key a config file or --set flag may name, with its default.
const std::vector<KeyInfo>& known_keys();

/// Settings of one command run. Values are kept as text and converted on
/// access, so a resolved config reproduces the run exactly.
class RunConfig {
 public:
  /// Throws ConfigError for keys outside known_keys().
  void set(const std::string& key, const std::string& value);
  /// Reads "key = value" lines; '#' starts a comment. Throws IoError or
  /// ConfigError.
  void load_file(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  /// Explicit value, else the key's default.
  std::string get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  network::BlockConfig block_config() const;
  training::TrainConfig train_config() const;
  imagery::SynthOptions synth_options() const;

  /// Every known key with its effective value, one per line.
  std::string resolved_text(const std::string& command) const;
  void write_resolved(const std::filesystem::path& dir, const std::string& command) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace smokeseg::cli
