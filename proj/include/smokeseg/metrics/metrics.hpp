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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "smokeseg/imagery/labels.hpp"

namespace smokeseg::metrics {

using imagery::LabelMask;
using imagery::PixelClass;

/// Pixel counts behind the per-class scores of one image.
struct ClassCounts {
  std::int64_t pn_pred = 0;         // predicted as the class
  std::int64_t pn_label = 0;        // labelled as the class
  std::int64_t pn_hit = 0;          // both
  std::int64_t pn_pred_in_gap = 0;  // predicted as the class inside the gap
  std::int64_t pn_gap = 0;          // unlabelled pixels
  std::int64_t n_total = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double r_h = 0.0;
  double f1h = 0.0;
  /// False when the class is neither predicted nor labelled; such classes
  /// are left out of the image average.
  bool defined = false;
};

/// Throws PairingError on a size mismatch and ContractError when the
/// prediction contains Gap.
ClassCounts count_pixels(const LabelMask& pred, const LabelMask& label, PixelClass cls);

/// Precision is 0 without predictions, recall is 0 without labels, and F1
/// is 0 when both are 0.
PrecisionRecall prec_rec_f1(const ClassCounts& counts);

/// pn_pred_in_gap / pn_pred + pn_gap / N, clamped to [0, 1]. The first term
/// is 0 without predictions.
double gap_modifier(const ClassCounts& counts);

double f1h(double f1, double r_h);

ClassMetrics class_metrics(const ClassCounts& counts);

struct Averages {
  double f1h = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct ImageEvaluation {
  std::string id;
  std::array<ClassMetrics, 3> per_class;  // Smoke, Cloud, Clear
  Averages average;                       // over defined classes
  /// F1h / F1 of the image average; 0 when F1 is 0.
  double ratio_f1h_f1 = 0.0;
};

ImageEvaluation evaluate_image(const LabelMask& pred, const LabelMask& label, std::string id = {});

struct MetricReport {
  std::vector<ImageEvaluation> images;
  /// Mean over images of each class's scores, counting only images where the
  /// class is defined. `defined` is false when no image defines it.
  std::array<ClassMetrics, 3> per_class;
  Averages dataset;  // mean of the image averages
  /// dataset.f1h / dataset.f1, or 0 when dataset.f1 is 0.
  double ratio_f1h_f1 = 0.0;
};

/// Throws EmptyEvaluationError for an empty list.
MetricReport aggregate(std::vector<ImageEvaluation> images);

}  // namespace smokeseg::metrics
