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

#include "smokeseg/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "smokeseg/errors.hpp"
#include "smokeseg/imagery/augment.hpp"
#include "smokeseg/model/checkpoint.hpp"
#include "smokeseg/nn/optim.hpp"
#include "smokeseg/random.hpp"
#include "smokeseg/training/loss.hpp"

namespace smokeseg::training {

namespace fs = std::filesystem;
using imagery::LabelMask;
using imagery::MultibandImage;

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void write_history(const fs::path& path, const std::vector<EpochRecord>& history) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << "epoch,loss,F1h,lr\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << fmt("%.10g", r.loss) << ',' << fmt("%.10g", r.f1h) << ',' << fmt("%.6g", r.lr) << '\n';
  }
  if (!out) throw IoError("cannot write " + path.string());
}

// Fisher-Yates with the library's own generator so orderings do not depend
// on the standard library in use.
void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::vector<LabelMask> predict_masks(const model::SegmentationModel& model,
                                     std::span<const MultibandImage* const> images, int batch_size) {
  nn::NoGradGuard no_grad;
  std::vector<LabelMask> out;
  out.reserve(images.size());
  for (std::size_t start = 0; start < images.size(); start += batch_size) {
    const auto batch = images.subspan(start, std::min<std::size_t>(batch_size, images.size() - start));
    const nn::Var scores = model.forward(nn::Var(to_tensor(batch)));
    for (auto& m : model::predict_classes(scores.value())) out.push_back(std::move(m));
  }
  return out;
}

metrics::MetricReport evaluate_model(const model::SegmentationModel& model, const std::vector<Sample>& samples,
                                     int batch_size) {
  std::vector<const MultibandImage*> images;
  for (const auto& s : samples) images.push_back(&s.image);
  const auto preds = predict_masks(model, images, batch_size);
  std::vector<metrics::ImageEvaluation> evals;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    evals.push_back(metrics::evaluate_image(preds[i], samples[i].mask, samples[i].image.source_id));
  }
  return metrics::aggregate(std::move(evals));
}

SessionResult train_session(const model::ModelSpec& spec, const network::BlockConfig& block,
                            const std::vector<Sample>& train, const std::vector<Sample>& eval,
                            const TrainConfig& cfg, std::uint64_t seed, const SessionOutputs& outputs) {
  cfg.validate();
  if (train.empty()) throw EmptyEvaluationError("training split is empty");
  if (eval.empty()) throw EmptyEvaluationError("evaluation split is empty");

  SessionResult result;
  result.seed = seed;
  result.model = model::build_model(spec, block, mix_seed(seed, 0));
  model::SegmentationModel& net = *result.model;
  const auto params = net.parameters();
  nn::Adam adam(params);
  Rng rng(mix_seed(seed, 1));

  std::vector<nn::Tensor> best_params;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  LoopCallbacks cb;
  cb.train_epoch = [&](double lr) {
    shuffle(order, rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<MultibandImage> images;
      std::vector<LabelMask> masks;
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = train[order[k]];
        const int variant = cfg.augment ? rng.uniform_int(0, imagery::kDihedralVariants - 1) : 0;
        images.push_back(variant ? imagery::transform(s.image, variant) : s.image);
        masks.push_back(variant ? imagery::transform(s.mask, variant) : s.mask);
      }
      std::vector<const MultibandImage*> ptrs;
      for (const auto& im : images) ptrs.push_back(&im);
      const Targets targets = encode_targets(masks);
      const nn::Var scores = net.forward(nn::Var(to_tensor(ptrs)));
      const nn::Var loss = masked_mse_loss(scores, targets.rgb, targets.labelled);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) return value;
      nn::backward(loss);
      adam.step(lr);
      total += value;
      ++batches;
    }
    return total / batches;
  };
  metrics::MetricReport last_report;
  cb.evaluate = [&] {
    last_report = evaluate_model(net, eval, cfg.batch_size);
    return last_report.dataset.f1h;
  };
  cb.on_improvement = [&](const EpochRecord& rec) {
    best_params.clear();
    for (const auto& p : params) best_params.push_back(p.value());
    result.best_report = last_report;
    if (outputs.checkpoint) {
      model::Provenance prov = outputs.provenance;
      prov["session_seed"] = std::to_string(seed);
      prov["epoch"] = std::to_string(rec.epoch);
      prov["eval_f1h"] = fmt("%.10g", rec.f1h);
      model::save_checkpoint(*outputs.checkpoint, net, prov);
    }
  };

  std::vector<EpochRecord> completed;
  cb.on_epoch = [&](const EpochRecord& rec) { completed.push_back(rec); };

  try {
    result.loop = run_epoch_loop(cfg, cb);
  } catch (const TrainingDivergedError&) {
    if (outputs.history_csv) write_history(*outputs.history_csv, completed);
    throw;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    nn::Var p = params[i];
    p.mutable_value() = best_params[i];
  }
  if (outputs.history_csv) write_history(*outputs.history_csv, result.loop.history);
  return result;
}

std::uint64_t session_seed(std::uint64_t run_seed, int index) {
  return mix_seed(run_seed, 0x5e55'0000ULL + static_cast<std::uint64_t>(index));
}

SessionSelection select_sessions(const std::vector<SessionSummary>& sessions) {
  SessionSelection sel;
  int survivors = 0;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const SessionSummary& s = sessions[i];
    if (s.diverged) continue;
    ++survivors;
    sel.avg_f1h += s.best.f1h;
    if (sel.best < 0 || s.best.f1h > sessions[sel.best].best.f1h) sel.best = static_cast<int>(i);
  }
  if (survivors == 0) {
    throw AllSessionsFailedError("all " + std::to_string(sessions.size()) + " training sessions diverged");
  }
  sel.avg_f1h /= survivors;
  return sel;
}

RunResult run_sessions(const model::ModelSpec& spec, const network::BlockConfig& block, const LoadedDataset& data,
                       const TrainConfig& cfg, const std::optional<fs::path>& out_dir,
                       const model::Provenance& provenance) {
  cfg.validate();
  RunResult run;
  for (int k = 0; k < cfg.sessions; ++k) {
    SessionSummary summary;
    summary.session = k + 1;
    summary.seed = session_seed(cfg.seed, k);
    SessionOutputs outputs;
    outputs.provenance = provenance;
    outputs.provenance["session"] = std::to_string(k + 1);
    if (out_dir) {
      outputs.checkpoint = *out_dir / ("session_" + std::to_string(k + 1) + ".ckpt");
      outputs.history_csv = *out_dir / ("session_" + std::to_string(k + 1) + ".csv");
    }
    try {
      SessionResult s = train_session(spec, block, data.train, data.eval, cfg, summary.seed, outputs);
      summary.epochs = static_cast<int>(s.loop.history.size());
      summary.best_epoch = s.loop.best_epoch;
      summary.best = s.best_report.dataset;
      // Only the leading model so far is kept in memory.
      if (!run.best_model || summary.best.f1h > run.best_report.dataset.f1h) {
        run.best_model = std::move(s.model);
        run.best_report = std::move(s.best_report);
      }
    } catch (const TrainingDivergedError& e) {
      summary.diverged = true;
      summary.failure = e.what();
      summary.epochs = e.epoch();
    }
    run.sessions.push_back(summary);
  }
  const SessionSelection sel = select_sessions(run.sessions);
  run.best_session = sel.best;
  run.avg_f1h = sel.avg_f1h;
  return run;
}

void write_session_table(const fs::path& path, const RunResult& run) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << "session,seed,status,epochs,best_epoch,F1h,F1,Prec,Rec\n";
  for (const auto& s : run.sessions) {
    out << s.session << ',' << s.seed << ',' << (s.diverged ? "diverged" : "ok") << ',' << s.epochs << ','
        << s.best_epoch << ',' << fmt("%.10g", s.best.f1h) << ',' << fmt("%.10g", s.best.f1) << ','
        << fmt("%.10g", s.best.precision) << ',' << fmt("%.10g", s.best.recall) << '\n';
  }
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace smokeseg::training
