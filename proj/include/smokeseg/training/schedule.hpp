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
#include <functional>
#include <vector>

namespace smokeseg::training {

struct TrainConfig {
  double initial_lr = 1e-4;
  int lr_halve_patience = 10;  // epochs without improvement before each halving
  double lr_floor = 1e-7;      // no halving once the rate is below this
  int stop_patience = 20;
  int batch_size = 4;
  int sessions = 10;
  std::uint64_t seed = 0;
  int max_epochs = 300;
  double improvement_tolerance = 1e-5;
  bool augment = true;  // one random square symmetry per image per epoch

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Learning-rate plateau schedule with early stopping, driven by one metric
/// value per epoch (higher is better).
class PlateauSchedule {
 public:
  explicit PlateauSchedule(const TrainConfig& cfg);

  struct Step {
    bool improved = false;
    bool lr_halved = false;
    bool stop = false;
  };

  /// Feeds the metric of the epoch that just ended.
  Step observe(double metric);

  double lr() const noexcept { return lr_; }
  double best() const noexcept { return best_; }
  int stale_epochs() const noexcept { return stale_; }

 private:
  double lr_;
  double floor_;
  int halve_patience_;
  int stop_patience_;
  double tolerance_;
  double best_;
  bool has_best_ = false;
  int stale_ = 0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double f1h = 0.0;
  double lr = 0.0;  // rate used during the epoch
  bool improved = false;
  bool lr_halved = false;  // halved after this epoch
};

struct LoopResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_f1h = 0.0;
  bool early_stopped = false;
};

/// The epoch loop without any model: `train_epoch(lr)` returns the mean
/// training loss, `evaluate()` the eval metric, `on_improvement` runs after
/// every new best and `on_epoch` after every epoch. A non-finite loss
/// raises TrainingDivergedError.
struct LoopCallbacks {
  std::function<double(double lr)> train_epoch;
  std::function<double()> evaluate;
  std::function<void(const EpochRecord&)> on_improvement;
  std::function<void(const EpochRecord&)> on_epoch;
};

LoopResult run_epoch_loop(const TrainConfig& cfg, const LoopCallbacks& callbacks);

}  // namespace smokeseg::training
