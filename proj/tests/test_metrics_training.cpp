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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "smokeseg/errors.hpp"
#include "smokeseg/imagery/synth.hpp"
#include "smokeseg/metrics/report.hpp"
#include "smokeseg/model/model_spec.hpp"
#include "smokeseg/nn/ops.hpp"
#include "smokeseg/random.hpp"
#include "smokeseg/training/loss.hpp"
#include "smokeseg/training/trainer.hpp"

namespace fs = std::filesystem;
using namespace smokeseg;
using imagery::LabelMask;
using imagery::PixelClass;

namespace {

// Label: rows 0-4 Smoke, 5-6 Gap, 7-9 Clear. Prediction: rows 0-6 Smoke,
// 7-9 Clear.
std::pair<LabelMask, LabelMask> fixture() {
  LabelMask label(10, 10), pred(10, 10);
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 10; ++c) {
      label.set(r, c, r < 5 ? PixelClass::Smoke : (r < 7 ? PixelClass::Gap : PixelClass::Clear));
      pred.set(r, c, r < 7 ? PixelClass::Smoke : PixelClass::Clear);
    }
  }
  return {pred, label};
}

}  // namespace

TEST_CASE("fixture counts agree with the enumeration oracle") {
  const auto [pred, label] = fixture();
  const auto k = metrics::count_pixels(pred, label, PixelClass::Smoke);
  CHECK(k.pn_pred == 70);
  CHECK(k.pn_label == 50);
  CHECK(k.pn_hit == 50);
  CHECK(k.pn_pred_in_gap == 20);
  CHECK(k.pn_gap == 20);
  CHECK(k.n_total == 100);
  const auto o = oracle::scan(pred, label, PixelClass::Smoke);
  CHECK(o.pred == k.pn_pred);
  CHECK(o.hit == k.pn_hit);
  CHECK(o.pred_in_gap == k.pn_pred_in_gap);
}

TEST_CASE("precision, recall and F1") {
  metrics::ClassCounts k{70, 50, 50, 20, 20, 100};
  const auto s = metrics::prec_rec_f1(k);
  CHECK(s.precision == doctest::Approx(5.0 / 7.0));
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == doctest::Approx(0.8333).epsilon(1e-4));
  const auto none = metrics::prec_rec_f1({0, 0, 0, 0, 0, 10});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("gap modifier and F1h") {
  CHECK(metrics::gap_modifier({10, 0, 0, 4, 20, 100}) == doctest::Approx(0.6));
  CHECK(metrics::gap_modifier({10, 0, 0, 10, 50, 100}) == 1.0);
  CHECK(metrics::gap_modifier({0, 5, 0, 0, 20, 100}) == doctest::Approx(0.2));
  CHECK(metrics::f1h(0.8333, 0.6) == doctest::Approx(0.3333).epsilon(1e-4));
}

TEST_CASE("fixture F1h through the full pipeline") {
  const auto [pred, label] = fixture();
  const auto ev = metrics::evaluate_image(pred, label, "fixture");
  const auto& smoke = ev.per_class[0];
  const auto& clear = ev.per_class[2];
  CHECK(smoke.f1h == doctest::Approx((5.0 / 6.0) * (1.0 - (20.0 / 70.0 + 0.2))));
  CHECK(smoke.f1h == doctest::Approx(0.4286).epsilon(1e-4));
  CHECK(clear.f1h == doctest::Approx(0.8));
  CHECK_FALSE(ev.per_class[1].defined);
  CHECK(ev.average.f1h == doctest::Approx((smoke.f1h + clear.f1h) / 2));
  CHECK(ev.ratio_f1h_f1 == doctest::Approx(ev.average.f1h / ev.average.f1));
}

TEST_CASE("relabelling gap pixels moves only the gap-dependent scores") {
  auto [pred, label] = fixture();
  const auto before = metrics::evaluate_image(pred, label);
  for (int c = 0; c < 10; ++c) pred.set(5, c, PixelClass::Cloud);
  const auto after = metrics::evaluate_image(pred, label);
  CHECK(after.per_class[0].recall == before.per_class[0].recall);
  CHECK(after.per_class[0].f1h > before.per_class[0].f1h);
  CHECK(after.per_class[2].f1h == before.per_class[2].f1h);
}

TEST_CASE("metric contracts") {
  LabelMask a(2, 2, PixelClass::Smoke), b(2, 3, PixelClass::Smoke);
  CHECK_THROWS_AS(metrics::count_pixels(a, b, PixelClass::Smoke), PairingError);
  LabelMask gap(2, 2);
  CHECK_THROWS_AS(metrics::count_pixels(gap, a, PixelClass::Smoke), ContractError);
  CHECK_THROWS_AS(metrics::aggregate({}), EmptyEvaluationError);
}

TEST_CASE("aggregate averages the image averages") {
  const auto [pred, label] = fixture();
  LabelMask perfect(10, 10, PixelClass::Clear);
  auto r = metrics::aggregate({metrics::evaluate_image(pred, label, "a"), metrics::evaluate_image(perfect, perfect, "b")});
  CHECK(r.dataset.f1h == doctest::Approx((r.images[0].average.f1h + 1.0) / 2));
  CHECK(r.per_class[2].f1h == doctest::Approx((0.8 + 1.0) / 2));
  CHECK(r.per_class[0].f1h == doctest::Approx(r.images[0].per_class[0].f1h));
  CHECK(r.ratio_f1h_f1 == doctest::Approx(r.dataset.f1h / r.dataset.f1));

  const std::string table = metrics::format_table(r);
  CHECK(table.find("F1h/F1") != std::string::npos);
  CHECK(table.find("a") != std::string::npos);
  CHECK(metrics::format_key_values(r).find("dataset.f1h=") != std::string::npos);
}

TEST_CASE("masked loss") {
  LabelMask m(1, 2);
  m.set(0, 0, PixelClass::Smoke);
  const auto t = training::encode_targets(std::span(&m, 1));
  nn::Tensor s({1, 1, 2, 3}, std::vector<double>{0.5, 0.0, 0.0, 0.9, 0.9, 0.9});
  nn::Var scores(s, true);
  const nn::Var loss = training::masked_mse_loss(scores, t.rgb, t.labelled);
  CHECK(loss.value()[0] == doctest::Approx(0.25 / 3.0));
  nn::backward(loss);
  for (int c = 3; c < 6; ++c) CHECK(scores.grad()[c] == 0.0);
  CHECK(scores.grad()[0] == doctest::Approx(2.0 * (0.5 - 1.0) / 3.0));

  std::vector<std::string> warnings;
  LabelMask empty(1, 2);
  const auto te = training::encode_targets(std::span(&empty, 1));
  CHECK(training::masked_mse_loss(nn::Var(s), te.rgb, te.labelled, &warnings).value()[0] == 0.0);
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(training::masked_mse_loss(nn::Var(nn::Tensor({1, 2, 2, 3})), t.rgb, t.labelled), PairingError);
}

TEST_CASE("plateau schedule") {
  training::TrainConfig cfg;
  SUBCASE("constant metric") {
    training::PlateauSchedule s(cfg);
    std::vector<int> halved;
    int stop = 0;
    for (int epoch = 1; epoch <= 40 && !stop; ++epoch) {
      const auto step = s.observe(0.3);
      CHECK(step.improved == (epoch == 1));
      if (step.lr_halved) halved.push_back(epoch);
      if (step.stop) stop = epoch;
    }
    CHECK(halved == std::vector<int>{11, 21});
    CHECK(stop == 21);
    CHECK(s.lr() == doctest::Approx(2.5e-5));
  }
  SUBCASE("improvements below the tolerance do not count") {
    training::PlateauSchedule s(cfg);
    s.observe(0.5);
    CHECK_FALSE(s.observe(0.5 + 5e-6).improved);
    CHECK(s.observe(0.5 + 2e-5).improved);
    CHECK(s.stale_epochs() == 0);
  }
  SUBCASE("no halving below the floor") {
    cfg.initial_lr = 1e-7;
    cfg.lr_floor = 1e-6;
    training::PlateauSchedule s(cfg);
    for (int i = 0; i < 15; ++i) CHECK_FALSE(s.observe(0.1).lr_halved);
  }
  SUBCASE("divergence aborts the loop") {
    training::LoopCallbacks cb;
    cb.train_epoch = [](double) { return std::nan(""); };
    cb.evaluate = [] { return 0.0; };
    CHECK_THROWS_AS(training::run_epoch_loop(cfg, cb), TrainingDivergedError);
  }
}

TEST_CASE("session selection") {
  std::vector<training::SessionSummary> s(3);
  s[0].best.f1h = 0.4;
  s[1].best.f1h = 0.6;
  s[2].best.f1h = 0.5;
  auto sel = training::select_sessions(s);
  CHECK(sel.best == 1);
  CHECK(sel.avg_f1h == doctest::Approx(0.5));
  s[1].diverged = true;
  sel = training::select_sessions(s);
  CHECK(sel.best == 2);
  CHECK(sel.avg_f1h == doctest::Approx(0.45));
  for (auto& x : s) x.diverged = true;
  CHECK_THROWS_AS(training::select_sessions(s), AllSessionsFailedError);
  CHECK(training::session_seed(1, 0) != training::session_seed(1, 1));
}

TEST_CASE("training is deterministic") {
  imagery::SynthOptions o;
  o.seed = 12;
  o.count = 3;
  o.height = o.width = 16;
  std::vector<training::Sample> samples;
  for (int i = 0; i < o.count; ++i) {
    auto s = imagery::synth_sample(o, i);
    samples.push_back({imagery::normalize(s.raster, {std::vector<double>(6, 10000.0)}), s.mask});
  }
  network::BlockConfig cfg;
  cfg.image_size = 16;
  cfg.base_channels = 4;
  cfg.unet_levels = 2;
  cfg.trfb_repeats = 1;
  cfg.region_size = 4;
  cfg.embed_dim = 8;
  cfg.vc_branch_channels = 2;
  cfg.mlp_hidden = 4;
  training::TrainConfig tc;
  tc.max_epochs = 3;
  tc.batch_size = 2;
  const fs::path dir = fs::temp_directory_path() / "smokeseg_unit_train";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto spec = model::parse_model_name("VC-TrUNet-ChA");
  const auto a = training::train_session(spec, cfg, samples, samples, tc, 5, {dir / "a.ckpt", dir / "a.csv", {}});
  const auto b = training::train_session(spec, cfg, samples, samples, tc, 5, {dir / "b.ckpt", dir / "b.csv", {}});
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv").rfind("epoch,loss,F1h,lr\n", 0) == 0);
  CHECK(a.loop.history.size() == 3);
  CHECK(fs::exists(dir / "a.ckpt"));
  const auto pa = a.model->parameters(), pb = b.model->parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].value().values()[0] == pb[i].value().values()[0]);
}
