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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "smokeseg/cli/commands.hpp"
#include "smokeseg/imagery/png.hpp"
#include "smokeseg/imagery/synth.hpp"
#include "smokeseg/model/segmentation_model.hpp"
#include "smokeseg/nn/ops.hpp"
#include "smokeseg/random.hpp"
#include "smokeseg/training/loss.hpp"
#include "smokeseg/training/trainer.hpp"

namespace fs = std::filesystem;
using namespace smokeseg;
using imagery::LabelMask;
using imagery::PixelClass;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("smokeseg_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

LabelMask random_mask(Rng& rng, int h, int w, double gap_rate, bool allow_gap) {
  LabelMask m(h, w);
  for (auto& code : m.codes) {
    if (allow_gap && rng.uniform() < gap_rate) {
      code = 0;
    } else {
      code = static_cast<std::uint8_t>(rng.uniform_int(1, 3));
    }
  }
  return m;
}

// 1 ------------------------------------------------------------------------
Outcome metric_oracle() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const int pairs = 2000;
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const int h = rng.uniform_int(1, 12), w = rng.uniform_int(1, 12);
    const LabelMask pred = random_mask(rng, h, w, 0.0, false);
    const LabelMask label = random_mask(rng, h, w, rng.uniform(0.0, 0.6), true);
    for (PixelClass cls : imagery::kLabelledClasses) {
      const auto got = metrics::count_pixels(pred, label, cls);
      const auto want = oracle::scan(pred, label, cls);
      if (got.pn_pred != want.pred || got.pn_label != want.label || got.pn_hit != want.hit ||
          got.pn_pred_in_gap != want.pred_in_gap || got.pn_gap != want.gap || got.n_total != want.total) {
        return {false, format("count mismatch on pair %d", i)};
      }
      const auto m = metrics::class_metrics(got);
      const auto ref = oracle::derive(want);
      for (double d : {m.precision - ref.precision, m.recall - ref.recall, m.f1 - ref.f1, m.r_h - ref.r_h,
                       m.f1h - ref.f1h}) {
        worst = std::max(worst, std::abs(d));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 30.0,
          format("%d pairs, counts exact, max metric deviation %.1e, %.2f s", pairs, worst, secs)};
}

// 2 ------------------------------------------------------------------------
Outcome two_class_example() {
  // 100 pixels: 10 labelled P (Smoke), 90 labelled N (Clear), all predicted N.
  LabelMask label(10, 10, PixelClass::Clear), pred(10, 10, PixelClass::Clear);
  for (int c = 0; c < 10; ++c) label.set(0, c, PixelClass::Smoke);
  const auto ev = metrics::evaluate_image(pred, label);
  const auto& p = ev.per_class[0];
  const auto& n = ev.per_class[2];
  const bool ok = n.recall == 1.0 && std::abs(n.precision - 0.9) < 1e-12 && std::abs(n.f1 - 0.947) <= 0.001 &&
                  p.f1 == 0.0 && std::abs(ev.average.f1 - 0.474) <= 0.002;
  return {ok, format("recall(N)=%.4f precision(N)=%.4f F1(N)=%.4f F1(P)=%.4f average F1=%.4f", n.recall, n.precision,
                     n.f1, p.f1, ev.average.f1)};
}

// 3 ------------------------------------------------------------------------
Outcome shape_audit() {
  const auto t0 = Clock::now();
  std::string failures;
  for (int size : {256, 64}) {
    network::BlockConfig cfg;
    cfg.image_size = size;
    nn::Tensor input({1, size, size, 6});
    Rng rng(3);
    for (double& v : input.values()) v = rng.uniform();
    for (const auto& spec : model::enumerate_ablation_grid()) {
      try {
        const auto net = model::build_model(spec, cfg, 11);
        net->audit();
        nn::NoGradGuard no_grad;
        const nn::Var out = net->forward(nn::Var(input));
        bool finite = true;
        for (double v : out.value().values()) finite = finite && std::isfinite(v) && v > 0.0 && v < 1.0;
        if (out.shape() != nn::Shape{1, size, size, 3} || !finite) {
          failures += " " + model::display_name(spec) + "@" + std::to_string(size);
        }
      } catch (const std::exception& e) {
        failures += " " + model::display_name(spec) + "@" + std::to_string(size) + "(" + e.what() + ")";
      }
    }
  }
  const double secs = seconds_since(t0);
  if (!failures.empty()) return {false, "failed:" + failures};
  return {secs < 120.0, format("9 variants map 1x256x256x6->1x256x256x3 and 1x64x64x6->1x64x64x3, %.1f s", secs)};
}

network::BlockConfig tiny_config() {
  network::BlockConfig cfg;
  cfg.image_size = 16;
  cfg.base_channels = 4;
  cfg.unet_levels = 2;
  cfg.trfb_repeats = 1;
  cfg.region_size = 4;
  cfg.attention_heads = 2;
  cfg.embed_dim = 8;
  cfg.ff_multiplier = 2;
  cfg.vc_branch_channels = 3;
  cfg.mlp_hidden = 6;
  // Smooth almost everywhere; relu leaves tied zeros under the region max.
  cfg.activation = network::Activation::LeakyRelu;
  return cfg;
}

// 4 ------------------------------------------------------------------------
Outcome gradient_check() {
  const network::BlockConfig cfg = tiny_config();
  const auto net = model::build_model(model::parse_model_name("VC-TrUNet-()"), cfg, 2024);
  Rng rng(77);
  nn::Tensor images({2, 16, 16, 6});
  for (double& v : images.values()) v = rng.uniform();
  std::vector<LabelMask> masks{random_mask(rng, 16, 16, 0.3, true), random_mask(rng, 16, 16, 0.3, true)};
  const auto targets = training::encode_targets(masks);
  auto loss_value = [&] {
    nn::NoGradGuard no_grad;
    return training::masked_mse_loss(net->forward(nn::Var(images)), targets.rgb, targets.labelled).value()[0];
  };

  net->zero_grad();
  nn::backward(training::masked_mse_loss(net->forward(nn::Var(images)), targets.rgb, targets.labelled));
  auto params = net->named_parameters();

  // Every tensor gets at least one sample; the rest are drawn uniformly.
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t t = 0; t < params.size(); ++t) {
    picks.emplace_back(t, static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(params[t].var.value().size()) - 1)));
  }
  while (picks.size() < 150) {
    const auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(params.size()) - 1));
    picks.emplace_back(t, static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(params[t].var.value().size()) - 1)));
  }
  double worst = 0.0;
  std::string worst_name;
  int failures = 0;
  for (const auto& [t, i] : picks) {
    nn::Var var = params[t].var;
    const double analytic = var.grad()[i];
    const double numeric = oracle::central_difference(var.mutable_value()[i], loss_value, 1e-5);
    const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-7});
    if (rel > worst) {
      worst = rel;
      worst_name = params[t].name;
    }
    failures += rel > 1e-3;
    if (rel > 1e-3) std::fprintf(stderr, "  %s[%zu] analytic %.6e numeric %.6e\n", params[t].name.c_str(), i, analytic, numeric);
  }

  // Gradient with respect to the scores themselves.
  nn::Tensor raw({2, 16, 16, 3});
  for (double& v : raw.values()) v = rng.uniform();
  nn::Var scores(raw, true);
  nn::backward(training::masked_mse_loss(scores, targets.rgb, targets.labelled));
  const nn::Tensor g = scores.grad();
  bool gap_zero = true;
  std::size_t gap_pixels = 0;
  for (std::size_t p = 0; p < targets.labelled.size(); ++p) {
    if (targets.labelled[p]) continue;
    ++gap_pixels;
    for (int c = 0; c < 3; ++c) gap_zero = gap_zero && g[p * 3 + c] == 0.0;
  }
  return {failures == 0 && gap_zero && picks.size() >= 100,
          format("%zu parameters, %d over 1e-3, worst relative error %.2e (%s); gap-pixel score gradients %s over %zu "
                 "pixels",
                 picks.size(), failures, worst, worst_name.c_str(), gap_zero ? "exactly zero" : "NONZERO", gap_pixels)};
}

// 5 ------------------------------------------------------------------------
Outcome masking_property() {
  Rng rng(55);
  int cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int h = rng.uniform_int(2, 10), w = rng.uniform_int(2, 10);
    const LabelMask label = random_mask(rng, h, w, 0.4, true);
    const auto targets = training::encode_targets(std::span(&label, 1));
    nn::Tensor scores({1, h, w, 3});
    for (double& v : scores.values()) v = rng.uniform();
    const double base = training::masked_mse_loss(nn::Var(scores), targets.rgb, targets.labelled).value()[0];

    nn::Tensor scores2 = scores, target2 = targets.rgb;
    LabelMask pred = random_mask(rng, h, w, 0.0, false), pred2 = pred;
    for (std::size_t p = 0; p < label.codes.size(); ++p) {
      if (targets.labelled[p]) continue;
      for (int c = 0; c < 3; ++c) {
        scores2[p * 3 + c] = rng.uniform(-5.0, 5.0);
        target2[p * 3 + c] = rng.uniform(-5.0, 5.0);
      }
      pred2.codes[p] = static_cast<std::uint8_t>(rng.uniform_int(1, 3));
    }
    const double mutated = training::masked_mse_loss(nn::Var(scores2), target2, targets.labelled).value()[0];
    if (mutated != base) return {false, format("loss changed in trial %d", trial)};
    for (PixelClass cls : imagery::kLabelledClasses) {
      const auto a = metrics::class_metrics(metrics::count_pixels(pred, label, cls));
      const auto b = metrics::class_metrics(metrics::count_pixels(pred2, label, cls));
      const auto ka = metrics::count_pixels(pred, label, cls), kb = metrics::count_pixels(pred2, label, cls);
      if (ka.pn_hit != kb.pn_hit || ka.pn_label != kb.pn_label || ka.pn_gap != kb.pn_gap) {
        return {false, format("hit/label counts changed in trial %d", trial)};
      }
      // Precision, recall and F1 depend on predictions outside the gap only
      // through pn_hit; pn_pred moves with gap predictions, which is the
      // r_h channel. Compare against the same quantities with gap
      // predictions removed from pn_pred.
      auto strip = [](metrics::ClassCounts k) {
        k.pn_pred -= k.pn_pred_in_gap;
        k.pn_pred_in_gap = 0;
        return k;
      };
      const auto sa = metrics::prec_rec_f1(strip(ka)), sb = metrics::prec_rec_f1(strip(kb));
      if (sa.precision != sb.precision || sa.recall != sb.recall || sa.f1 != sb.f1 || a.recall != b.recall) {
        return {false, format("labelled-pixel metrics changed in trial %d", trial)};
      }
      ++cases;
    }
  }
  return {true, format("200 random cases: loss bit-identical under gap mutations of scores and targets; %d class "
                       "checks with hits, labels and recall unchanged",
                       cases)};
}

// 6 ------------------------------------------------------------------------
Outcome overfit() {
  const auto t0 = Clock::now();
  imagery::SynthOptions o;
  o.seed = 6;
  o.count = 8;
  o.height = o.width = 32;
  o.gap_margin = 0;
  o.clear_below = 0.5;
  o.cloud = {0.02, 0.35};
  std::vector<imagery::SynthSample> scenes;
  imagery::BandScale scale{std::vector<double>(imagery::kBandCount, 0.0)};
  for (int i = 0; i < o.count; ++i) {
    scenes.push_back(imagery::synth_sample(o, i));
    const auto& data = scenes.back().raster.data;
    for (std::size_t k = 0; k < data.size(); ++k) {
      scale.band_max[k % imagery::kBandCount] = std::max<double>(scale.band_max[k % imagery::kBandCount], data[k]);
    }
  }
  std::vector<training::Sample> train;
  for (int i = 0; i < o.count; ++i) {
    train.push_back({imagery::normalize(scenes[i].raster, scale, "scene" + std::to_string(i)), scenes[i].mask});
  }
  network::BlockConfig cfg;
  cfg.image_size = 32;
  cfg.base_channels = 16;
  cfg.unet_levels = 2;
  cfg.trfb_repeats = 1;
  cfg.embed_dim = 32;
  cfg.vc_branch_channels = 16;
  training::TrainConfig tc;
  tc.max_epochs = 200;
  tc.stop_patience = 200;
  tc.lr_halve_patience = 199;
  tc.sessions = 1;
  tc.augment = false;
  tc.initial_lr = 1e-3;
  tc.seed = 1;
  const auto result = training::train_session(model::parse_model_name("VC-TrUNet-()"), cfg, train, train, tc,
                                              training::session_seed(tc.seed, 0));
  const auto report = training::evaluate_model(*result.model, train, 4);
  const double secs = seconds_since(t0);
  return {report.dataset.f1 >= 0.95 && secs < 1800.0,
          format("training-set F1 %.4f (F1h %.4f) after %zu epochs, best epoch %d, %.0f s", report.dataset.f1,
                 report.dataset.f1h, result.loop.history.size(), result.loop.best_epoch, secs)};
}

// 7 ------------------------------------------------------------------------
Outcome schedule() {
  training::TrainConfig tc;
  tc.max_epochs = 300;
  std::vector<int> halvings;
  std::vector<double> rates;
  training::LoopCallbacks cb;
  cb.train_epoch = [](double) { return 0.5; };
  cb.evaluate = [] { return 0.42; };
  const auto r = training::run_epoch_loop(tc, cb);
  for (const auto& e : r.history) {
    if (e.lr_halved) halvings.push_back(e.epoch);
    rates.push_back(e.lr);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < rates.size(); ++i) monotone = monotone && rates[i] <= rates[i - 1];
  const int stop = r.history.empty() ? 0 : r.history.back().epoch;
  const bool ok = halvings == std::vector<int>{11, 21} && stop == 21 && r.early_stopped && monotone &&
                  rates[11] == 0.5e-4;
  std::string h;
  for (int e : halvings) h += (h.empty() ? "" : ",") + std::to_string(e);
  return {ok, format("halvings after epochs {%s}, stop at epoch %d, lr for epoch 12 = %g", h.c_str(), stop, rates[11])};
}

// 8 ------------------------------------------------------------------------
Outcome ablation() {
  const auto t0 = Clock::now();
  const fs::path dir = scratch("ablate");
  cli::RunConfig cfg;
  cfg.set("out", (dir / "data").string());
  cfg.set("seed", "8");
  cfg.set("count", "8");
  cfg.set("image_size", "32");
  std::ostringstream log;
  cli::cmd_synth(cfg, log);

  cli::RunConfig ab;
  ab.set("data", (dir / "data" / "manifest.tsv").string());
  ab.set("out", (dir / "ablate").string());
  ab.set("seed", "8");
  ab.set("sessions", "2");
  ab.set("epochs", "30");
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{{"image_size", "32"},
                                                                              {"base_channels", "8"},
                                                                              {"unet_levels", "2"},
                                                                              {"trfb_repeats", "1"},
                                                                              {"embed_dim", "16"},
                                                                              {"vc_branch_channels", "8"},
                                                                              {"initial_lr", "0.001"}}) {
    ab.set(k, v);
  }
  try {
    cli::cmd_ablate(ab, log);
  } catch (const std::exception& e) {
    return {false, std::string("ablate failed: ") + e.what()};
  }
  std::ifstream in(dir / "ablate" / "ablation.txt");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::vector<std::string> columns;
  for (std::string w; hs >> w;) columns.push_back(w);
  bool ok = columns == std::vector<std::string>{"model", "avgF1h", "F1h", "F1", "Prec", "Rec"};
  int rows = 0;
  const auto grid = model::enumerate_ablation_grid();
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    std::string name;
    double v[5];
    ls >> name >> v[0] >> v[1] >> v[2] >> v[3] >> v[4];
    ok = ok && !ls.fail() && rows < 9 && name == model::display_name(grid[rows]);
    for (double x : v) ok = ok && x >= 0.0 && x <= 1.0;
    ++rows;
  }
  const double secs = seconds_since(t0);
  return {ok && rows == 9, format("%d rows in id order with columns avgF1h F1h F1 Prec Rec, %.0f s", rows, secs)};
}

// 9 ------------------------------------------------------------------------
Outcome token_permutation() {
  network::BlockConfig cfg;
  cfg.image_size = 32;
  cfg.trfb_repeats = 2;
  cfg.embed_dim = 16;
  cfg.attention_heads = 4;
  Rng init(9);
  const int C = 6, S = 32, R = cfg.region_size, G = S / R;
  network::TransformerBlock block(C, S, S, cfg, init);
  nn::Var pos = block.positional_embedding();
  pos.mutable_value().fill(0.0);

  Rng rng(10);
  nn::Tensor x({2, S, S, C});
  for (double& v : x.values()) v = rng.normal();
  std::vector<int> perm(G * G);
  for (int i = 0; i < G * G; ++i) perm[i] = i;
  for (int i = G * G - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);

  // Moves region perm[t] of `src` to region t of the result (or back).
  auto move_regions = [&](const nn::Tensor& src, bool inverse) {
    nn::Tensor dst(src.shape());
    for (int b = 0; b < 2; ++b) {
      for (int t = 0; t < G * G; ++t) {
        const int from = inverse ? t : perm[t], to = inverse ? perm[t] : t;
        for (int r = 0; r < R; ++r) {
          for (int c = 0; c < R; ++c) {
            for (int k = 0; k < C; ++k) {
              dst.at(b, (to / G) * R + r, (to % G) * R + c, k) = src.at(b, (from / G) * R + r, (from % G) * R + c, k);
            }
          }
        }
      }
    }
    return dst;
  };
  nn::NoGradGuard no_grad;
  const nn::Tensor direct = block.forward(nn::Var(x)).value();
  const nn::Tensor routed = move_regions(block.forward(nn::Var(move_regions(x, false))).value(), true);
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i) worst = std::max(worst, std::abs(direct[i] - routed[i]));
  return {worst <= 1e-5, format("%d region tokens, max deviation %.2e", G * G, worst)};
}

// 10 -----------------------------------------------------------------------
Outcome rasterizer() {
  Rng rng(1010);
  int mismatched = 0;
  for (int i = 0; i < 100; ++i) {
    const int h = rng.uniform_int(4, 16), w = rng.uniform_int(4, 16);
    const int n = rng.uniform_int(3, 7);
    std::vector<oracle::Pt> poly;
    std::ostringstream doc;
    doc << "{\"shapes\":[{\"label\":\"Smoke\",\"shape_type\":\"polygon\",\"points\":[";
    for (int k = 0; k < n; ++k) {
      // Half-pixel lattice so outlines pass exactly through pixel centres.
      const double x = rng.uniform_int(-2, 2 * w + 2) * 0.5, y = rng.uniform_int(-2, 2 * h + 2) * 0.5;
      poly.push_back({x, y});
      doc << (k ? "," : "") << "[" << x << "," << y << "]";
    }
    doc << "]}]}";
    const auto got = imagery::rasterize_labels(doc.str(), h, w);
    if (!got.warnings.empty()) continue;  // degenerate draw, skipped by both
    const LabelMask want = oracle::paint({{PixelClass::Smoke, poly}}, h, w);
    mismatched += !(got.mask == want);
  }

  const fs::path dir = scratch("png");
  bool png_ok = true;
  for (int i = 0; i < 10; ++i) {
    const LabelMask m = random_mask(rng, rng.uniform_int(1, 40), rng.uniform_int(1, 40), 0.3, true);
    const auto rgb = imagery::mask_to_rgb(m);
    imagery::write_png(dir / "m.png", rgb);
    const auto back = imagery::read_png(dir / "m.png");
    png_ok = png_ok && back == rgb && imagery::rgb_to_mask(back) == m;
  }
  return {mismatched == 0 && png_ok,
          format("100 random polygons, %d differ from the point-in-polygon oracle; PNG colour round trip %s",
                 mismatched, png_ok ? "bit-exact" : "BROKEN")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "metric oracle equivalence", metric_oracle},
      {2, "two-class worked example", two_class_example},
      {3, "shape audit of the nine variants", shape_audit},
      {4, "gradient correctness", gradient_check},
      {5, "masking property", masking_property},
      {6, "overfit check", overfit},
      {7, "plateau schedule state machine", schedule},
      {8, "ablation grid smoke test", ablation},
      {9, "region-token permutation equivariance", token_permutation},
      {10, "rasterizer equivalence and PNG coding", rasterizer},
  };
  // Optional argument: run only the listed criterion ids ("3,6").
  std::vector<int> only;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    for (std::string item; std::getline(ss, item, ',');) only.push_back(std::stoi(item));
  }
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
