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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "smokeseg/cli/commands.hpp"
#include "smokeseg/errors.hpp"
#include "smokeseg/imagery/manifest.hpp"
#include "smokeseg/imagery/png.hpp"
#include "smokeseg/imagery/raster.hpp"

namespace fs = std::filesystem;
using namespace smokeseg;
using cli::RunConfig;
using imagery::LabelMask;
using imagery::PixelClass;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("smokeseg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Numeric "key=value" lines of a report.
std::map<std::string, double> key_values(const fs::path& p) {
  std::map<std::string, double> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    try {
      out[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
    } catch (const std::invalid_argument&) {
    }
  }
  return out;
}

void tiny_network(RunConfig& cfg) {
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{{"image_size", "16"},
                                                                              {"base_channels", "4"},
                                                                              {"unet_levels", "2"},
                                                                              {"trfb_repeats", "1"},
                                                                              {"region_size", "4"},
                                                                              {"embed_dim", "8"},
                                                                              {"vc_branch_channels", "2"},
                                                                              {"mlp_hidden", "4"}}) {
    cfg.set(k, v);
  }
}

fs::path synth_data(const fs::path& dir, int count) {
  RunConfig cfg;
  cfg.set("out", dir.string());
  cfg.set("seed", "21");
  cfg.set("count", std::to_string(count));
  cfg.set("image_size", "16");
  std::ostringstream log;
  cli::cmd_synth(cfg, log);
  return dir / "manifest.tsv";
}

}  // namespace

TEST_CASE("config keys") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("no_such_key", "1"), ConfigError);
  CHECK(cfg.get_int("sessions") == 10);
  cfg.set("epochs", "x");
  CHECK_THROWS_AS(cfg.train_config(), ConfigError);
  cfg.set("epochs", "5");
  CHECK(cfg.train_config().max_epochs == 5);
  cfg.set("activation", "tanh");
  CHECK_THROWS_AS(cfg.block_config(), ConfigError);

  const fs::path dir = fresh_dir("cfg");
  std::ofstream(dir / "run.cfg") << "# comment\nseed = 9\nmodel=()-UNet-ChA  # trailing\n";
  RunConfig from_file;
  from_file.load_file(dir / "run.cfg");
  CHECK(from_file.get_u64("seed") == 9);
  CHECK(from_file.get("model") == "()-UNet-ChA");
  std::ofstream(dir / "bad.cfg") << "bogus=1\n";
  CHECK_THROWS_AS(from_file.load_file(dir / "bad.cfg"), ConfigError);
}

TEST_CASE("errors map to exit codes") {
  RunConfig cfg;
  cfg.set("model", "VC-Nope-()");
  cfg.set("data", "x");
  cfg.set("out", fresh_dir("exit").string());
  std::ostringstream log, err;
  CHECK(cli::run_command_guarded("train", cfg, log, err) == 2);
  CHECK(err.str().find("ModelNameError") != std::string::npos);
  RunConfig missing;
  missing.set("data", (fresh_dir("exit2") / "none.tsv").string());
  missing.set("out", fresh_dir("exit3").string());
  CHECK(cli::run_command_guarded("evaluate", missing, log, err) == 3);
  CHECK(cli::run_command_guarded("bogus", missing, log, err) == 2);
}

TEST_CASE("synth is byte-reproducible") {
  const fs::path a = fresh_dir("synth_a"), b = fresh_dir("synth_b");
  synth_data(a, 4);
  synth_data(b, 4);
  for (const char* f : {"image_0000.mbr", "image_0003.mbr", "label_0002.png", "manifest.tsv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("rasterize writes a colour-coded mask") {
  const fs::path dir = fresh_dir("rasterize");
  std::ofstream(dir / "scene.json")
      << R"({"imageHeight":8,"imageWidth":8,"shapes":[{"label":"Cloud","shape_type":"rectangle","points":[[0,0],[4,8]]}]})";
  RunConfig cfg;
  cfg.set("annotation", (dir / "scene.json").string());
  cfg.set("out", (dir / "out").string());
  std::ostringstream log;
  cli::cmd_rasterize(cfg, log);
  const LabelMask m = imagery::rgb_to_mask(imagery::read_png(dir / "out" / "scene.png"));
  CHECK(m.count(PixelClass::Cloud) == 32);
  CHECK(m.count(PixelClass::Gap) == 32);
}

TEST_CASE("evaluate from prediction files") {
  const fs::path dir = fresh_dir("eval_fixture");
  // The 10x10 scenario as a one-image manifest.
  LabelMask label(10, 10), pred(10, 10);
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 10; ++c) {
      label.set(r, c, r < 5 ? PixelClass::Smoke : (r < 7 ? PixelClass::Gap : PixelClass::Clear));
      pred.set(r, c, r < 7 ? PixelClass::Smoke : PixelClass::Clear);
    }
  }
  imagery::write_raster(dir / "scene.mbr", {10, 10, 6, std::vector<float>(600, 1.0f)}, std::endian::little);
  imagery::write_png(dir / "scene_label.png", imagery::mask_to_rgb(label));
  fs::create_directories(dir / "pred");
  imagery::write_png(dir / "pred" / "scene_pred.png", imagery::mask_to_rgb(pred));
  imagery::write_manifest(dir / "manifest.tsv",
                          {{{dir / "scene.mbr", dir / "scene_label.png", imagery::Split::Eval}}, {}});

  RunConfig cfg;
  cfg.set("data", (dir / "manifest.tsv").string());
  cfg.set("predictions", (dir / "pred").string());
  cfg.set("out", (dir / "report").string());
  std::ostringstream log;
  cli::cmd_evaluate(cfg, log);
  const auto kv = key_values(dir / "report" / "report.kv");
  CHECK(kv.at("class.Smoke.f1h") == doctest::Approx((5.0 / 6.0) * (1.0 - (20.0 / 70.0 + 0.2))));
  CHECK(kv.at("class.Clear.f1h") == doctest::Approx(0.8));
  CHECK(log.str().find("F1h/F1") != std::string::npos);
  CHECK(fs::exists(dir / "report" / "resolved.cfg"));

  // A prediction may not contain Gap.
  imagery::write_png(dir / "pred" / "scene_pred.png", imagery::mask_to_rgb(label));
  CHECK_THROWS_AS(cli::cmd_evaluate(cfg, log), ContractError);
}

TEST_CASE("train, evaluate, predict and ablate end to end") {
  const fs::path dir = fresh_dir("e2e");
  const fs::path manifest = synth_data(dir / "data", 4);

  RunConfig train;
  tiny_network(train);
  train.set("data", manifest.string());
  train.set("out", (dir / "run1").string());
  train.set("sessions", "2");
  train.set("epochs", "2");
  train.set("seed", "4");
  std::ostringstream log;
  cli::cmd_train(train, log);
  train.set("out", (dir / "run2").string());
  cli::cmd_train(train, log);
  for (const char* f : {"sessions.csv", "session_1.csv", "session_2.csv"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir / "run1" / f));
    CHECK(slurp(dir / "run1" / f) == slurp(dir / "run2" / f));
  }
  CHECK(slurp(dir / "run1" / "sessions.csv").rfind("session,seed,status,epochs,best_epoch,F1h,F1,Prec,Rec\n", 0) == 0);
  CHECK(fs::exists(dir / "run1" / "best.ckpt"));
  CHECK(fs::exists(dir / "run1" / "best_eval" / "report.txt"));

  RunConfig eval;
  eval.set("data", manifest.string());
  eval.set("checkpoint", (dir / "run1" / "best.ckpt").string());
  eval.set("out", (dir / "eval").string());
  cli::cmd_evaluate(eval, log);
  const auto kv = key_values(dir / "eval" / "report.kv");
  CHECK(kv.at("dataset.f1h") >= 0.0);
  CHECK(kv.at("dataset.f1h") <= 1.0);

  RunConfig predict;
  predict.set("checkpoint", (dir / "run1" / "best.ckpt").string());
  predict.set("images", (dir / "data" / "image_0000.mbr").string());
  predict.set("out", (dir / "pred").string());
  cli::cmd_predict(predict, log);
  const auto rgb = imagery::read_png(dir / "pred" / "image_0000_pred.png");
  CHECK(rgb.height == 16);
  const LabelMask m = imagery::rgb_to_mask(rgb);
  CHECK(m.count(PixelClass::Gap) == 0);
  CHECK(fs::exists(dir / "pred" / "image_0000_overlay.png"));

  RunConfig ablate;
  tiny_network(ablate);
  ablate.set("data", manifest.string());
  ablate.set("out", (dir / "ablate").string());
  ablate.set("models", "9:()-()-()");
  ablate.set("sessions", "1");
  ablate.set("epochs", "1");
  cli::cmd_ablate(ablate, log);
  std::istringstream csv(slurp(dir / "ablate" / "ablation.csv"));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "id,model,avgF1h,F1h,F1,Prec,Rec,sessions_ok");
  CHECK(row.rfind("9,()-()-(),", 0) == 0);
  CHECK_FALSE(std::getline(csv, extra));
}
