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

#include "smokeseg/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "smokeseg/errors.hpp"

namespace smokeseg::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<KeyInfo> build_keys() {
  std::vector<KeyInfo> keys = {
      {"model", "VC-TrUNet-()", "model name, VC|()-TrUNet|UNet|UNet+TrfB|()-ChA|()"},
      {"models", "", "ablate: comma-separated model names (default: all nine variants)"},
      {"data", "", "dataset manifest"},
      {"out", "", "output directory"},
      {"seed", "0", "run seed"},
      {"checkpoint", "", "model checkpoint to load"},
      {"predictions", "", "evaluate: directory of <image stem>_pred.png masks instead of a checkpoint"},
      {"annotation", "", "rasterize: Labelme JSON document"},
      {"images", "", "predict: comma-separated raster files (default: every manifest entry)"},
      {"split", "eval", "evaluate: eval, train or all"},
      {"sessions", "10", "training sessions per model"},
      {"epochs", "300", "epoch cap per session"},
      {"initial_lr", "0.0001", "initial learning rate"},
      {"lr_halve_patience", "10", "epochs without improvement before each halving"},
      {"lr_floor", "1e-07", "no halving below this rate"},
      {"stop_patience", "20", "epochs without improvement before stopping"},
      {"batch_size", "4", "images per step"},
      {"improvement_tolerance", "1e-05", "minimum F1h gain that counts as improvement"},
      {"augment", "true", "random square symmetry per training image and epoch"},
      {"count", "4", "synth: number of scenes"},
      {"eval_fraction", "0.25", "synth: share of scenes in the eval split"},
      {"gap_margin", "1", "synth: unlabelled margin around class boundaries"},
      {"clear_below", "0.15", "synth: opacity under which a pixel counts as Clear"},
  };
  for (const auto& [name, value] : network::to_fields(network::BlockConfig{})) {
    keys.push_back({name, value, "network geometry"});
  }
  return keys;
}

const KeyInfo* find_key(const std::string& key) {
  const auto& keys = known_keys();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeyInfo& k) { return k.name == key; });
  return it == keys.end() ? nullptr : &*it;
}

}  // namespace

const std::vector<KeyInfo>& known_keys() {
  static const std::vector<KeyInfo> keys = build_keys();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      set(key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

bool RunConfig::has(const std::string& key) const {
  if (const auto it = values_.find(key); it != values_.end()) return !it->second.empty();
  const KeyInfo* info = find_key(key);
  return info && !info->default_value.empty();
}

std::string RunConfig::get(const std::string& key) const {
  if (const auto it = values_.find(key); it != values_.end()) return it->second;
  const KeyInfo* info = find_key(key);
  if (!info) throw ConfigError("unknown config key '" + key + "'");
  return info->default_value;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string v = get(key);
  int out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string v = get(key);
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::logic_error&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

network::BlockConfig RunConfig::block_config() const {
  network::BlockConfig cfg;
  for (const auto& [name, value] : network::to_fields(network::BlockConfig{})) network::set_field(cfg, name, get(name));
  try {
    cfg.validate();
  } catch (const GraphShapeError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

training::TrainConfig RunConfig::train_config() const {
  training::TrainConfig cfg;
  cfg.initial_lr = get_double("initial_lr");
  cfg.lr_halve_patience = get_int("lr_halve_patience");
  cfg.lr_floor = get_double("lr_floor");
  cfg.stop_patience = get_int("stop_patience");
  cfg.batch_size = get_int("batch_size");
  cfg.sessions = get_int("sessions");
  cfg.seed = get_u64("seed");
  cfg.max_epochs = get_int("epochs");
  cfg.improvement_tolerance = get_double("improvement_tolerance");
  cfg.augment = get_bool("augment");
  cfg.validate();
  return cfg;
}

imagery::SynthOptions RunConfig::synth_options() const {
  imagery::SynthOptions o;
  o.seed = get_u64("seed");
  o.count = get_int("count");
  o.height = o.width = get_int("image_size");
  o.eval_fraction = get_double("eval_fraction");
  o.gap_margin = get_int("gap_margin");
  o.clear_below = get_double("clear_below");
  if (o.count < 1) throw ConfigError("count must be at least 1");
  if (o.height < 1) throw ConfigError("image_size must be positive");
  return o;
}

std::string RunConfig::resolved_text(const std::string& command) const {
  std::ostringstream out;
  out << "# resolved configuration of '" << command << "'\n";
  for (const auto& k : known_keys()) out << k.name << "=" << get(k.name) << "\n";
  return out.str();
}

void RunConfig::write_resolved(const std::filesystem::path& dir, const std::string& command) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "resolved.cfg", std::ios::trunc);
  out << resolved_text(command);
  if (!out) throw IoError("cannot write " + (dir / "resolved.cfg").string());
}

}  // namespace smokeseg::cli
