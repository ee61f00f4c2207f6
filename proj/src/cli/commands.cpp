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

#include "smokeseg/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "smokeseg/errors.hpp"
#include "smokeseg/imagery/png.hpp"
#include "smokeseg/metrics/report.hpp"
#include "smokeseg/model/checkpoint.hpp"
#include "smokeseg/training/trainer.hpp"

namespace smokeseg::cli {

namespace fs = std::filesystem;
using imagery::LabelMask;
using imagery::MultibandImage;

namespace {

constexpr double kOverlayAlpha = 0.45;

fs::path require_path(const RunConfig& cfg, const std::string& key, const std::string& command) {
  if (!cfg.has(key)) throw ConfigError(command + " needs --" + key + " (or '" + key + "=' in the config file)");
  return cfg.get(key);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

// Predicts an image of any size by covering it with model-sized tiles;
// border tiles are zero padded and trimmed afterwards.
LabelMask predict_tiled(const model::SegmentationModel& net, const MultibandImage& image) {
  const int S = net.config().image_size;
  LabelMask out(image.height, image.width);
  for (int top = 0; top < image.height; top += S) {
    for (int left = 0; left < image.width; left += S) {
      MultibandImage tile;
      tile.height = tile.width = S;
      tile.data.assign(static_cast<std::size_t>(S) * S * imagery::kBandCount, 0.0f);
      const int rows = std::min(S, image.height - top), cols = std::min(S, image.width - left);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          for (int b = 0; b < imagery::kBandCount; ++b) tile.at(r, c, b) = image.at(top + r, left + c, b);
        }
      }
      const MultibandImage* ptr = &tile;
      const LabelMask pred = training::predict_masks(net, std::span(&ptr, 1), 1).front();
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out.set(top + r, left + c, pred.at(r, c));
      }
    }
  }
  return out;
}

// Natural-colour composite (Red, Green, Blue bands) blended with the class
// colours of the prediction.
imagery::RgbImage overlay(const MultibandImage& image, const LabelMask& pred) {
  const imagery::RgbImage colours = imagery::mask_to_rgb(pred);
  imagery::RgbImage out{image.height, image.width, std::vector<std::uint8_t>(colours.rgb.size())};
  constexpr int kComposite[3] = {imagery::Red, imagery::Green, imagery::Blue};
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const std::size_t i = (static_cast<std::size_t>(r) * image.width + c) * 3;
      for (int k = 0; k < 3; ++k) {
        const double base = std::clamp(static_cast<double>(image.at(r, c, kComposite[k])), 0.0, 1.0) * 255.0;
        const double v = (1.0 - kOverlayAlpha) * base + kOverlayAlpha * colours.rgb[i + k];
        out.rgb[i + k] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

imagery::BandScale scale_for(const model::Checkpoint& ck, const imagery::DatasetManifest* manifest) {
  if (const auto it = ck.provenance.find("band_max"); it != ck.provenance.end()) {
    return imagery::BandScale::parse(it->second);
  }
  if (manifest) return training::manifest_band_scale(*manifest);
  return {};
}

std::vector<imagery::ManifestEntry> entries_for_split(const imagery::DatasetManifest& m, const std::string& split) {
  std::vector<imagery::ManifestEntry> out;
  for (const auto& e : m.entries) {
    if (e.label.empty()) continue;
    if (split == "all" || imagery::to_string(e.split) == split) out.push_back(e);
  }
  if (split != "all" && split != "eval" && split != "train") {
    throw ConfigError("split must be eval, train or all, got '" + split + "'");
  }
  return out;
}

std::vector<model::ModelSpec> ablation_models(const RunConfig& cfg) {
  std::vector<model::ModelSpec> specs;
  const auto names = cfg.get_list("models");
  if (names.empty()) return model::enumerate_ablation_grid();
  for (const auto& n : names) {
    const model::ModelSpec s = model::parse_model_name(n);
    if (std::find(specs.begin(), specs.end(), s) == specs.end()) specs.push_back(s);
  }
  // Grid members by id, anything else afterwards.
  std::stable_sort(specs.begin(), specs.end(), [](const model::ModelSpec& a, const model::ModelSpec& b) {
    const int ia = model::grid_id(a), ib = model::grid_id(b);
    return (ia ? ia : 1000) < (ib ? ib : 1000);
  });
  return specs;
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const ModelNameError*>(&e)) return "ModelNameError";
  if (dynamic_cast<const GraphShapeError*>(&e)) return "GraphShapeError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  if (dynamic_cast<const BandCountError*>(&e)) return "BandCountError";
  if (dynamic_cast<const DataIntegrityError*>(&e)) return "DataIntegrityError";
  if (dynamic_cast<const LabelSchemaError*>(&e)) return "LabelSchemaError";
  if (dynamic_cast<const PairingError*>(&e)) return "PairingError";
  if (dynamic_cast<const ContractError*>(&e)) return "ContractError";
  if (dynamic_cast<const EmptyEvaluationError*>(&e)) return "EmptyEvaluationError";
  if (dynamic_cast<const TrainingDivergedError*>(&e)) return "TrainingDivergedError";
  if (dynamic_cast<const AllSessionsFailedError*>(&e)) return "AllSessionsFailedError";
  return "Error";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

void cmd_synth(const RunConfig& cfg, std::ostream& log) {
  const fs::path out = require_path(cfg, "out", "synth");
  const imagery::SynthOptions opts = cfg.synth_options();
  const auto manifest = imagery::synth_generate(out, opts);
  cfg.write_resolved(out, "synth");
  log << "synth: wrote " << manifest.entries.size() << " scenes (" << manifest.split(imagery::Split::Eval).size()
      << " eval) to " << (out / "manifest.tsv").string() << "\n";
}

void cmd_rasterize(const RunConfig& cfg, std::ostream& log) {
  const fs::path annotation = require_path(cfg, "annotation", "rasterize");
  const fs::path out = require_path(cfg, "out", "rasterize");
  std::ifstream in(annotation);
  if (!in) throw IoError("cannot open annotation " + annotation.string());
  std::ostringstream text;
  text << in.rdbuf();
  int height = cfg.get_int("image_size"), width = height;
  try {
    const auto doc = nlohmann::json::parse(text.str());
    height = doc.value("imageHeight", height);
    width = doc.value("imageWidth", width);
  } catch (const nlohmann::json::exception& e) {
    throw LabelSchemaError(annotation.string() + ": " + e.what());
  }
  const auto result = imagery::rasterize_labels(text.str(), height, width);
  for (const auto& w : result.warnings) log << "rasterize: warning: " << w << "\n";
  const fs::path png = out / (annotation.stem().string() + ".png");
  imagery::write_png(png, imagery::mask_to_rgb(result.mask));
  cfg.write_resolved(out, "rasterize");
  log << "rasterize: " << png.string() << " (" << height << "x" << width << "; Smoke "
      << result.mask.count(imagery::PixelClass::Smoke) << ", Cloud " << result.mask.count(imagery::PixelClass::Cloud)
      << ", Clear " << result.mask.count(imagery::PixelClass::Clear) << ", Gap "
      << result.mask.count(imagery::PixelClass::Gap) << " pixels)\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const model::ModelSpec spec = model::parse_model_name(cfg.get("model"));
  const fs::path data_path = require_path(cfg, "data", "train");
  const fs::path out = require_path(cfg, "out", "train");
  const network::BlockConfig block = cfg.block_config();
  const training::TrainConfig tc = cfg.train_config();
  const auto manifest = imagery::read_manifest(data_path);
  const auto data = training::load_dataset(manifest, block.image_size);
  cfg.write_resolved(out, "train");

  model::Provenance prov{{"band_max", data.scale.to_string()},
                         {"data", data_path.generic_string()},
                         {"run_seed", std::to_string(tc.seed)}};
  const auto run = training::run_sessions(spec, block, data, tc, out, prov);
  training::write_session_table(out / "sessions.csv", run);
  const auto& best = run.sessions[run.best_session];
  prov["session"] = std::to_string(best.session);
  prov["session_seed"] = std::to_string(best.seed);
  prov["epoch"] = std::to_string(best.best_epoch);
  model::save_checkpoint(out / "best.ckpt", *run.best_model, prov);
  metrics::write_report(out / "best_eval", run.best_report);
  log << "train: " << model::display_name(spec) << " avgF1h " << fixed(run.avg_f1h) << ", best session "
      << best.session << " (epoch " << best.best_epoch << ") F1h " << fixed(best.best.f1h) << " F1 "
      << fixed(best.best.f1) << "\n";
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const fs::path data_path = require_path(cfg, "data", "evaluate");
  const fs::path out = require_path(cfg, "out", "evaluate");
  const auto manifest = imagery::read_manifest(data_path);
  const auto entries = entries_for_split(manifest, cfg.get("split"));
  std::vector<metrics::ImageEvaluation> evals;

  if (cfg.has("predictions")) {
    const fs::path dir = cfg.get("predictions");
    for (const auto& e : entries) {
      const LabelMask pred = imagery::rgb_to_mask(imagery::read_png(dir / (e.image.stem().string() + "_pred.png")));
      const LabelMask label = imagery::load_label(e.label, pred.height, pred.width);
      evals.push_back(metrics::evaluate_image(pred, label, e.image.filename().string()));
    }
  } else {
    const model::Checkpoint ck = model::load_checkpoint(require_path(cfg, "checkpoint", "evaluate"));
    const imagery::BandScale scale = scale_for(ck, &manifest);
    for (const auto& e : entries) {
      const MultibandImage image = imagery::load_multiband(e.image, scale);
      const LabelMask label = imagery::load_label(e.label, image.height, image.width);
      evals.push_back(metrics::evaluate_image(predict_tiled(*ck.model, image), label, e.image.filename().string()));
    }
  }
  const auto report = metrics::aggregate(std::move(evals));
  metrics::write_report(out, report);
  cfg.write_resolved(out, "evaluate");
  log << metrics::format_table(report);
}

void cmd_predict(const RunConfig& cfg, std::ostream& log) {
  const fs::path out = require_path(cfg, "out", "predict");
  const model::Checkpoint ck = model::load_checkpoint(require_path(cfg, "checkpoint", "predict"));
  std::vector<fs::path> images;
  std::optional<imagery::DatasetManifest> manifest;
  if (cfg.has("data")) manifest = imagery::read_manifest(cfg.get("data"));
  for (const auto& p : cfg.get_list("images")) images.emplace_back(p);
  if (images.empty() && manifest) {
    for (const auto& e : manifest->entries) images.push_back(e.image);
  }
  if (images.empty()) throw ConfigError("predict needs --images or --data");
  const imagery::BandScale scale = scale_for(ck, manifest ? &*manifest : nullptr);

  for (const auto& path : images) {
    const MultibandImage image = imagery::load_multiband(path, scale);
    const LabelMask pred = predict_tiled(*ck.model, image);
    const std::string stem = path.stem().string();
    imagery::write_png(out / (stem + "_pred.png"), imagery::mask_to_rgb(pred));
    imagery::write_png(out / (stem + "_overlay.png"), overlay(image, pred));
    log << "predict: " << stem << " -> " << (out / (stem + "_pred.png")).string() << "\n";
  }
  cfg.write_resolved(out, "predict");
}

void cmd_ablate(const RunConfig& cfg, std::ostream& log) {
  const fs::path data_path = require_path(cfg, "data", "ablate");
  const fs::path out = require_path(cfg, "out", "ablate");
  const network::BlockConfig block = cfg.block_config();
  const training::TrainConfig tc = cfg.train_config();
  const auto specs = ablation_models(cfg);
  const auto manifest = imagery::read_manifest(data_path);
  const auto data = training::load_dataset(manifest, block.image_size);
  cfg.write_resolved(out, "ablate");

  char line[200];
  std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s %8s\n", "model", "avgF1h", "F1h", "F1", "Prec", "Rec");
  std::string table = line;
  std::string csv = "id,model,avgF1h,F1h,F1,Prec,Rec,sessions_ok\n";
  for (const auto& spec : specs) {
    const int id = model::grid_id(spec);
    const fs::path dir = out / ("model_" + (id ? std::to_string(id) : sanitize(spec.canonical_name())));
    model::Provenance prov{{"band_max", data.scale.to_string()}, {"data", data_path.generic_string()}};
    log << "ablate: training " << model::display_name(spec) << "\n";
    const auto run = training::run_sessions(spec, block, data, tc, dir, prov);
    training::write_session_table(dir / "sessions.csv", run);
    const auto& best = run.sessions[run.best_session].best;
    int ok = 0;
    for (const auto& s : run.sessions) ok += !s.diverged;
    std::snprintf(line, sizeof line, "%-24s %8.4f %8.4f %8.4f %8.4f %8.4f\n", model::display_name(spec).c_str(),
                  run.avg_f1h, best.f1h, best.f1, best.precision, best.recall);
    table += line;
    csv += std::to_string(id) + "," + spec.canonical_name() + "," + fixed(run.avg_f1h) + "," + fixed(best.f1h) +
           "," + fixed(best.f1) + "," + fixed(best.precision) + "," + fixed(best.recall) + "," + std::to_string(ok) +
           "\n";
  }
  write_text(out / "ablation.txt", table);
  write_text(out / "ablation.csv", csv);
  log << table;
}

void run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  if (command == "synth") return cmd_synth(cfg, log);
  if (command == "rasterize") return cmd_rasterize(cfg, log);
  if (command == "train") return cmd_train(cfg, log);
  if (command == "evaluate") return cmd_evaluate(cfg, log);
  if (command == "predict") return cmd_predict(cfg, log);
  if (command == "ablate") return cmd_ablate(cfg, log);
  throw ConfigError("unknown command '" + command + "'");
}

int run_command_guarded(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    run_command(command, cfg, log);
    return 0;
  } catch (const Error& e) {
    err << "smokeseg " << command << ": " << error_kind(e) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "smokeseg " << command << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "smokeseg " << command << ": internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace smokeseg::cli
