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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smokeseg/metrics/metrics.hpp"
#include "smokeseg/model/checkpoint.hpp"
#include "smokeseg/model/segmentation_model.hpp"
#include "smokeseg/training/dataset.hpp"
#include "smokeseg/training/schedule.hpp"

namespace smokeseg::training {

/// Class masks for a list of images, predicted in batches without recording
/// gradients.
std::vector<imagery::LabelMask> predict_masks(const model::SegmentationModel& model,
                                              std::span<const imagery::MultibandImage* const> images,
                                              int batch_size);

/// Dataset metrics of the model on labelled samples.
metrics::MetricReport evaluate_model(const model::SegmentationModel& model, const std::vector<Sample>& samples,
                                     int batch_size);

struct SessionOutputs {
  /// Written atomically on every improvement when set.
  std::optional<std::filesystem::path> checkpoint;
  /// Per-epoch CSV (epoch,loss,f1h,lr) when set.
  std::optional<std::filesystem::path> history_csv;
  model::Provenance provenance;
};

struct SessionResult {
  int session = 0;
  std::uint64_t seed = 0;
  LoopResult loop;
  /// Model restored to its best epoch.
  std::unique_ptr<model::SegmentationModel> model;
  metrics::MetricReport best_report;
};

/// One training run from a fresh initialisation derived from session_seed.
/// Throws TrainingDivergedError when the loss turns non-finite; the last
/// checkpoint written, if any, is left in place.
SessionResult train_session(const model::ModelSpec& spec, const network::BlockConfig& block,
                            const std::vector<Sample>& train, const std::vector<Sample>& eval,
                            const TrainConfig& cfg, std::uint64_t session_seed, const SessionOutputs& outputs = {});

struct SessionSummary {
  int session = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string failure;
  int epochs = 0;
  int best_epoch = 0;
  metrics::Averages best;  // dataset averages at the best epoch
};

struct RunResult {
  std::vector<SessionSummary> sessions;
  int best_session = -1;
  /// Mean best-epoch F1h over sessions that did not diverge.
  double avg_f1h = 0.0;
  std::unique_ptr<model::SegmentationModel> best_model;
  metrics::MetricReport best_report;
};

struct SessionSelection {
  int best = -1;        // index of the top non-diverged session
  double avg_f1h = 0.0; // mean best F1h over non-diverged sessions
};

/// Picks the session with the highest best-epoch F1h (the first one on
/// ties). Throws AllSessionsFailedError when every session diverged.
SessionSelection select_sessions(const std::vector<SessionSummary>& sessions);

/// Seed of session `index` under a run seed.
std::uint64_t session_seed(std::uint64_t run_seed, int index);

/// Trains cfg.sessions sessions. With `out_dir` set, session k writes
/// session_k.ckpt and session_k.csv there, k counting from 1. Diverged sessions are recorded
/// and skipped; AllSessionsFailedError when none survives.
RunResult run_sessions(const model::ModelSpec& spec, const network::BlockConfig& block, const LoadedDataset& data,
                       const TrainConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {},
                       const model::Provenance& provenance = {});

/// Writes the per-session table as CSV.
void write_session_table(const std::filesystem::path& path, const RunResult& run);

}  // namespace smokeseg::training
