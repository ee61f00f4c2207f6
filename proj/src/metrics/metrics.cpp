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

#include "smokeseg/metrics/metrics.hpp"

#include <algorithm>

#include "smokeseg/errors.hpp"

namespace smokeseg::metrics {

ClassCounts count_pixels(const LabelMask& pred, const LabelMask& label, PixelClass cls) {
  if (pred.height != label.height || pred.width != label.width || pred.codes.size() != label.codes.size()) {
    throw PairingError("prediction " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                       " does not match label " + std::to_string(label.height) + "x" + std::to_string(label.width));
  }
  const auto c = static_cast<std::uint8_t>(cls);
  const auto gap = static_cast<std::uint8_t>(PixelClass::Gap);
  ClassCounts k;
  k.n_total = static_cast<std::int64_t>(pred.codes.size());
  for (std::size_t i = 0; i < pred.codes.size(); ++i) {
    const std::uint8_t p = pred.codes[i], l = label.codes[i];
    if (p == gap) throw ContractError("prediction contains Gap at pixel " + std::to_string(i));
    const bool predicted = p == c;
    k.pn_pred += predicted;
    k.pn_label += l == c;
    k.pn_hit += predicted && l == c;
    k.pn_gap += l == gap;
    k.pn_pred_in_gap += predicted && l == gap;
  }
  return k;
}

PrecisionRecall prec_rec_f1(const ClassCounts& k) {
  PrecisionRecall out;
  out.precision = k.pn_pred > 0 ? static_cast<double>(k.pn_hit) / k.pn_pred : 0.0;
  out.recall = k.pn_label > 0 ? static_cast<double>(k.pn_hit) / k.pn_label : 0.0;
  const double s = out.precision + out.recall;
  out.f1 = s > 0.0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

double gap_modifier(const ClassCounts& k) {
  const double in_gap = k.pn_pred > 0 ? static_cast<double>(k.pn_pred_in_gap) / k.pn_pred : 0.0;
  const double gap_share = k.n_total > 0 ? static_cast<double>(k.pn_gap) / k.n_total : 0.0;
  return std::clamp(in_gap + gap_share, 0.0, 1.0);
}

double f1h(double f1, double r_h) { return f1 * (1.0 - r_h); }

ClassMetrics class_metrics(const ClassCounts& k) {
  const PrecisionRecall prf = prec_rec_f1(k);
  ClassMetrics m;
  m.precision = prf.precision;
  m.recall = prf.recall;
  m.f1 = prf.f1;
  m.r_h = gap_modifier(k);
  m.f1h = f1h(m.f1, m.r_h);
  m.defined = k.pn_pred > 0 || k.pn_label > 0;
  return m;
}

ImageEvaluation evaluate_image(const LabelMask& pred, const LabelMask& label, std::string id) {
  ImageEvaluation ev;
  ev.id = std::move(id);
  int defined = 0;
  for (std::size_t i = 0; i < imagery::kLabelledClasses.size(); ++i) {
    ev.per_class[i] = class_metrics(count_pixels(pred, label, imagery::kLabelledClasses[i]));
    const ClassMetrics& m = ev.per_class[i];
    if (!m.defined) continue;
    ++defined;
    ev.average.f1h += m.f1h;
    ev.average.f1 += m.f1;
    ev.average.precision += m.precision;
    ev.average.recall += m.recall;
  }
  if (defined > 0) {
    ev.average.f1h /= defined;
    ev.average.f1 /= defined;
    ev.average.precision /= defined;
    ev.average.recall /= defined;
  }
  ev.ratio_f1h_f1 = ev.average.f1 > 0.0 ? ev.average.f1h / ev.average.f1 : 0.0;
  return ev;
}

MetricReport aggregate(std::vector<ImageEvaluation> images) {
  if (images.empty()) throw EmptyEvaluationError("no images to aggregate");
  MetricReport r;
  std::array<int, 3> seen{};
  for (const auto& ev : images) {
    r.dataset.f1h += ev.average.f1h;
    r.dataset.f1 += ev.average.f1;
    r.dataset.precision += ev.average.precision;
    r.dataset.recall += ev.average.recall;
    for (std::size_t c = 0; c < 3; ++c) {
      const ClassMetrics& m = ev.per_class[c];
      if (!m.defined) continue;
      ++seen[c];
      ClassMetrics& acc = r.per_class[c];
      acc.precision += m.precision;
      acc.recall += m.recall;
      acc.f1 += m.f1;
      acc.r_h += m.r_h;
      acc.f1h += m.f1h;
    }
  }
  const double n = static_cast<double>(images.size());
  r.dataset.f1h /= n;
  r.dataset.f1 /= n;
  r.dataset.precision /= n;
  r.dataset.recall /= n;
  for (std::size_t c = 0; c < 3; ++c) {
    ClassMetrics& acc = r.per_class[c];
    acc.defined = seen[c] > 0;
    if (!acc.defined) continue;
    acc.precision /= seen[c];
    acc.recall /= seen[c];
    acc.f1 /= seen[c];
    acc.r_h /= seen[c];
    acc.f1h /= seen[c];
  }
  r.ratio_f1h_f1 = r.dataset.f1 > 0.0 ? r.dataset.f1h / r.dataset.f1 : 0.0;
  r.images = std::move(images);
  return r;
}

}  // namespace smokeseg::metrics
