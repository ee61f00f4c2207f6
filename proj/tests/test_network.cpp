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
#include <cstring>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "smokeseg/errors.hpp"
#include "smokeseg/model/checkpoint.hpp"
#include "smokeseg/model/segmentation_model.hpp"
#include "smokeseg/network/trunet.hpp"
#include "smokeseg/nn/ops.hpp"
#include "smokeseg/random.hpp"

namespace fs = std::filesystem;
using namespace smokeseg;
using network::BlockConfig;
using nn::Shape;
using nn::Tensor;
using nn::Var;

namespace {

Tensor random_input(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(0.05, 1.0);
  return t;
}

BlockConfig small_config() {
  BlockConfig cfg;
  cfg.image_size = 32;
  cfg.base_channels = 8;
  cfg.unet_levels = 3;
  cfg.trfb_repeats = 1;
  cfg.region_size = 4;
  cfg.embed_dim = 16;
  cfg.vc_branch_channels = 4;
  cfg.mlp_hidden = 8;
  return cfg;
}

}  // namespace

TEST_CASE("VC keeps resolution and widens to the base width") {
  Rng rng(1);
  network::VirtualChannels vc(6, 32, 64, network::Activation::Relu, rng);
  CHECK(vc.output_shape({2, 256, 256, 6}) == Shape{2, 256, 256, 64});
  const Var out = vc.forward(Var(random_input({1, 64, 64, 6}, 2)));
  CHECK(out.shape() == Shape{1, 64, 64, 64});
}

TEST_CASE("TrfB token geometry") {
  BlockConfig cfg;
  Rng rng(1);
  network::TransformerBlock full(64, 256, 256, cfg, rng);
  CHECK(full.token_count() == 1024);
  CHECK(full.token_width() == 128);
  CHECK(full.output_shape({1, 256, 256, 64}) == Shape{1, 256, 256, 64});
  CHECK(nn::ops::region_tokens(Var(Tensor({1, 16, 16, 5})), 8).shape() == Shape{1, 4, 10});
}

TEST_CASE("TrfB output is constant over each region") {
  BlockConfig cfg = small_config();
  Rng rng(3);
  network::TransformerBlock block(4, 16, 16, cfg, rng);
  const Tensor out = block.forward(Var(random_input({1, 16, 16, 4}, 4))).value();
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      for (int k = 0; k < 4; ++k) CHECK(out.at(0, r, c, k) == out.at(0, r / 4 * 4, c / 4 * 4, k));
    }
  }
}

TEST_CASE("TrUNet shapes") {
  Rng rng(5);
  BlockConfig cfg;
  cfg.trfb_repeats = 1;
  network::TrUNet net(64, cfg, true, rng);
  CHECK(net.output_shape({1, 256, 256, 64}) == Shape{1, 256, 256, 64});
  CHECK(net.encoder_shapes({1, 256, 256, 64}).back() == Shape{1, 32, 32, 512});
  network::TrUNet six(6, cfg, true, rng);
  CHECK(six.output_shape({1, 256, 256, 6}) == Shape{1, 256, 256, 6});

  BlockConfig bad = cfg;
  bad.image_size = 250;
  CHECK_THROWS_AS(network::TrUNet(6, bad, true, rng), GraphShapeError);
}

TEST_CASE("channel attention factorises per channel") {
  Rng rng(6);
  network::ChannelAttention cha(8, 4, network::Activation::Relu, rng);
  const Var x(random_input({2, 5, 5, 8}, 7));
  const Tensor y = cha.forward(x).value();
  const Tensor g = cha.factors(x).value();
  for (int b = 0; b < 2; ++b) {
    for (int k = 0; k < 8; ++k) {
      const double factor = y.at(b, 0, 0, k) / x.value().at(b, 0, 0, k);
      CHECK(factor > 0.0);
      CHECK(factor < 1.0);
      CHECK(factor == doctest::Approx(g[b * 8 + k]));
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) CHECK(y.at(b, r, c, k) / x.value().at(b, r, c, k) == doctest::Approx(factor));
      }
    }
  }
}

TEST_CASE("MLP head is per-pixel with scores in (0, 1)") {
  Rng rng(8);
  network::MlpHead head(6, 8, 3, network::Activation::Relu, rng);
  Tensor x = random_input({1, 4, 4, 6}, 9);
  const Tensor a = head.forward(Var(x)).value();
  CHECK(a.shape() == Shape{1, 4, 4, 3});
  for (double v : a.values()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  x.at(0, 2, 2, 0) += 1.0;
  const Tensor b = head.forward(Var(x)).value();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r == 2 && c == 2) continue;
      for (int k = 0; k < 3; ++k) CHECK(a.at(0, r, c, k) == b.at(0, r, c, k));
    }
  }
}

TEST_CASE("model names") {
  using model::MidModule;
  const auto s = model::parse_model_name("VC-TrUNet-()");
  CHECK(s.has_vc);
  CHECK(s.mid == MidModule::TrUNet);
  CHECK_FALSE(s.has_cha);
  const auto mlp = model::parse_model_name("9:()-()-()");
  CHECK_FALSE(mlp.has_vc);
  CHECK(mlp.mid == MidModule::None);
  CHECK_FALSE(mlp.has_cha);
  for (const char* bad : {"", "VC", "VC-TrUNet", "VC-Foo-()", "()-TrUNet-ChA-x", "10:VC-TrUNet-()"}) {
    CHECK_THROWS_AS(model::parse_model_name(bad), ModelNameError);
  }
  const auto grid = model::enumerate_ablation_grid();
  REQUIRE(grid.size() == 9);
  CHECK(grid[6].canonical_name() == "VC-UNet+TrfB-()");
  CHECK(model::display_name(grid[0]) == "1:VC-TrUNet-()");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(model::parse_model_name(grid[i].canonical_name()) == grid[i]);
    CHECK(model::grid_id(grid[i]) == static_cast<int>(i) + 1);
  }
}

TEST_CASE("bare MLP model holds only the head") {
  BlockConfig cfg = small_config();
  const auto net = model::build_model(model::parse_model_name("()-()-()"), cfg, 1);
  CHECK(net->vc() == nullptr);
  CHECK(net->unet() == nullptr);
  CHECK(net->channel_attention() == nullptr);
  CHECK(net->parameter_count() == net->head().parameter_count());
  for (const auto& p : net->named_parameters()) CHECK(p.name.rfind("head.", 0) == 0);
}

TEST_CASE("every parameter of every variant receives gradient") {
  BlockConfig cfg = small_config();
  cfg.activation = network::Activation::LeakyRelu;
  const Tensor x = random_input({1, 32, 32, 6}, 10);
  for (const auto& spec : model::enumerate_ablation_grid()) {
    CAPTURE(spec.canonical_name());
    const auto net = model::build_model(spec, cfg, 2);
    nn::backward(nn::ops::sum(net->forward(Var(x))));
    for (const auto& p : net->named_parameters()) {
      CAPTURE(p.name);
      double mass = 0.0;
      for (double g : p.var.grad().values()) mass += std::abs(g);
      CHECK(mass > 0.0);
    }
  }
}

TEST_CASE("larger components mean more parameters") {
  BlockConfig cfg = small_config();
  auto count = [&](const char* name) { return model::build_model(model::parse_model_name(name), cfg, 1)->parameter_count(); };
  CHECK(count("()-()-()") < count("()-()-ChA"));
  CHECK(count("()-UNet-()") < count("()-TrUNet-()"));
  CHECK(count("()-TrUNet-()") < count("VC-TrUNet-()"));
  CHECK(count("VC-UNet-()") < count("VC-UNet+TrfB-()"));
}

TEST_CASE("model input size is checked") {
  const auto net = model::build_model(model::parse_model_name("VC-TrUNet-()"), small_config(), 1);
  CHECK_THROWS_AS(net->forward(Var(Tensor({1, 16, 16, 6}))), GraphShapeError);
  CHECK_THROWS_AS(net->forward(Var(Tensor({1, 32, 32, 5}))), GraphShapeError);
}

TEST_CASE("predicted classes follow the argmax") {
  Rng rng(11);
  Tensor scores({2, 5, 6, 3});
  for (double& v : scores.values()) v = static_cast<double>(rng.uniform_int(0, 4)) / 4.0;  // plenty of ties
  const auto masks = model::predict_classes(scores);
  const auto want = oracle::argmax_last(scores);
  REQUIRE(masks.size() == 2);
  std::size_t i = 0;
  for (const auto& m : masks) {
    for (auto code : m.codes) CHECK(static_cast<int>(code) == want[i++] + 1);
  }
}

TEST_CASE("checkpoints restore weights bit-exactly") {
  const fs::path dir = fs::temp_directory_path() / "smokeseg_unit_ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  BlockConfig cfg = small_config();
  cfg.activation = network::Activation::LeakyRelu;
  const auto net = model::build_model(model::parse_model_name("VC-UNet+TrfB-ChA"), cfg, 77);
  model::save_checkpoint(dir / "m.ckpt", *net, {{"epoch", "3"}});
  CHECK_FALSE(fs::exists(dir / "m.ckpt.tmp"));
  const auto ck = model::load_checkpoint(dir / "m.ckpt");
  CHECK(ck.provenance.at("epoch") == "3");
  CHECK(ck.model->spec() == net->spec());
  CHECK(ck.model->config() == cfg);
  const auto a = net->named_parameters(), b = ck.model->named_parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(std::memcmp(a[i].var.value().data(), b[i].var.value().data(), a[i].var.value().size() * sizeof(double)) == 0);
  }

  const auto size = fs::file_size(dir / "m.ckpt");
  fs::resize_file(dir / "m.ckpt", size - 8);
  CHECK_THROWS_AS(model::load_checkpoint(dir / "m.ckpt"), DataIntegrityError);
  std::ofstream(dir / "junk.ckpt") << "SSCKgarbage";
  CHECK_THROWS_AS(model::load_checkpoint(dir / "junk.ckpt"), DataIntegrityError);
  CHECK_THROWS_AS(model::load_checkpoint(dir / "none.ckpt"), IoError);
}
