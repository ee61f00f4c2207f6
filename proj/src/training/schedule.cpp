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

#include "smokeseg/training/schedule.hpp"

#include <cmath>
#include <string>

#include "smokeseg/errors.hpp"

namespace smokeseg::training {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("training config: " + msg); };
  if (!(initial_lr > 0.0)) fail("initial_lr must be positive");
  if (!(lr_floor >= 0.0) || !(lr_floor < initial_lr)) fail("lr_floor must lie in [0, initial_lr)");
  if (lr_halve_patience < 1) fail("lr_halve_patience must be >= 1");
  if (stop_patience <= lr_halve_patience) fail("stop_patience must exceed lr_halve_patience");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (sessions < 1) fail("sessions must be >= 1");
  if (max_epochs < 1) fail("max_epochs must be >= 1");
  if (!(improvement_tolerance >= 0.0)) fail("improvement_tolerance must be >= 0");
}

PlateauSchedule::PlateauSchedule(const TrainConfig& cfg)
    : lr_(cfg.initial_lr),
      floor_(cfg.lr_floor),
      halve_patience_(cfg.lr_halve_patience),
      stop_patience_(cfg.stop_patience),
      tolerance_(cfg.improvement_tolerance),
      best_(0.0) {}

PlateauSchedule::Step PlateauSchedule::observe(double metric) {
  Step step;
  if (!has_best_ || metric >= best_ + tolerance_) {
    has_best_ = true;
    best_ = metric;
    stale_ = 0;
    step.improved = true;
    return step;
  }
  ++stale_;
  if (stale_ % halve_patience_ == 0 && lr_ >= floor_) {
    lr_ *= 0.5;
    step.lr_halved = true;
  }
  step.stop = stale_ >= stop_patience_;
  return step;
}

LoopResult run_epoch_loop(const TrainConfig& cfg, const LoopCallbacks& cb) {
  cfg.validate();
  PlateauSchedule schedule(cfg);
  LoopResult result;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = schedule.lr();
    rec.loss = cb.train_epoch(rec.lr);
    if (!std::isfinite(rec.loss)) {
      throw TrainingDivergedError("training loss became non-finite in epoch " + std::to_string(epoch), epoch);
    }
    rec.f1h = cb.evaluate();
    const auto step = schedule.observe(rec.f1h);
    rec.improved = step.improved;
    rec.lr_halved = step.lr_halved;
    result.history.push_back(rec);
    if (step.improved) {
      result.best_epoch = epoch;
      result.best_f1h = rec.f1h;
      if (cb.on_improvement) cb.on_improvement(rec);
    }
    if (cb.on_epoch) cb.on_epoch(rec);
    if (step.stop) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace smokeseg::training
