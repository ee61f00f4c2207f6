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

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smokeseg/cli/commands.hpp"
#include "smokeseg/errors.hpp"

namespace {

struct Flags {
  std::optional<std::string> config, model, data, out, seed, sessions, epochs, checkpoint, predictions, annotation;
  std::vector<std::string> images;
  std::vector<std::string> sets;
};

void add_common(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "key=value config file; flags override it");
  sub.add_option("--model", f.model, "model name, e.g. VC-TrUNet-()");
  sub.add_option("--data", f.data, "dataset manifest");
  sub.add_option("--out", f.out, "output directory");
  sub.add_option("--seed", f.seed, "run seed");
  sub.add_option("--sessions", f.sessions, "training sessions per model");
  sub.add_option("--epochs", f.epochs, "epoch cap per session");
  sub.add_option("--checkpoint", f.checkpoint, "model checkpoint");
  sub.add_option("--predictions", f.predictions, "directory of predicted masks (evaluate)");
  sub.add_option("--annotation", f.annotation, "Labelme JSON document (rasterize)");
  sub.add_option("--set", f.sets, "override any config key: --set key=value")->take_all();
  sub.add_option("images", f.images, "raster files (predict)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoke segmentation of six-band imagery: synthesis, labelling, training, evaluation, ablation"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::string> about = {
      {"synth", "generate a synthetic labelled dataset"},
      {"rasterize", "turn a Labelme document into a colour-coded label PNG"},
      {"train", "train one model over several sessions and keep the best"},
      {"evaluate", "score a checkpoint or prediction PNGs against labels"},
      {"predict", "write class masks and overlays for raster files"},
      {"ablate", "train and compare the model variants"},
  };
  for (const auto& name : smokeseg::cli::kCommands) {
    const auto it = about.find(std::string(name));
    add_common(*app.add_subcommand(std::string(name), it == about.end() ? "" : it->second), flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  smokeseg::cli::RunConfig cfg;
  try {
    if (flags.config) cfg.load_file(*flags.config);
    const std::pair<const char*, const std::optional<std::string>*> direct[] = {
        {"model", &flags.model},           {"data", &flags.data},
        {"out", &flags.out},               {"seed", &flags.seed},
        {"sessions", &flags.sessions},     {"epochs", &flags.epochs},
        {"checkpoint", &flags.checkpoint}, {"predictions", &flags.predictions},
        {"annotation", &flags.annotation},
    };
    for (const auto& [key, value] : direct) {
      if (*value) cfg.set(key, **value);
    }
    for (const auto& kv : flags.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw smokeseg::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!flags.images.empty()) {
      std::string joined;
      for (const auto& p : flags.images) joined += (joined.empty() ? "" : ",") + p;
      cfg.set("images", joined);
    }
  } catch (const smokeseg::Error& e) {
    std::cerr << "smokeseg " << command << ": " << e.what() << "\n";
    return smokeseg::exit_code_for(e);
  }
  return smokeseg::cli::run_command_guarded(command, cfg, std::cout, std::cerr);
}
