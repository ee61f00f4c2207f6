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

#include "smokeseg/metrics/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "smokeseg/errors.hpp"

namespace smokeseg::metrics {

namespace {

std::string row(const std::string& name, double f1h, double f1, double prec, double rec, double ratio) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s %7.4f %7.4f %7.4f %7.4f %7.4f\n", name.c_str(), f1h, f1, prec, rec, ratio);
  return buf;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

std::string format_table(const MetricReport& r) {
  std::string out;
  char header[160];
  std::snprintf(header, sizeof header, "%-28s %7s %7s %7s %7s %7s\n", "image", "F1h", "F1", "Prec", "Rec", "F1h/F1");
  out += header;
  for (const auto& ev : r.images) {
    out += row(ev.id, ev.average.f1h, ev.average.f1, ev.average.precision, ev.average.recall, ev.ratio_f1h_f1);
  }
  out += "\n";
  for (std::size_t c = 0; c < 3; ++c) {
    const ClassMetrics& m = r.per_class[c];
    const std::string name = "class " + imagery::to_string(imagery::kLabelledClasses[c]);
    if (!m.defined) {
      out += name + std::string(name.size() < 28 ? 28 - name.size() : 0, ' ') + "  (absent)\n";
      continue;
    }
    out += row(name, m.f1h, m.f1, m.precision, m.recall, m.f1 > 0 ? m.f1h / m.f1 : 0.0);
  }
  out += row("dataset (" + std::to_string(r.images.size()) + " images)", r.dataset.f1h, r.dataset.f1,
             r.dataset.precision, r.dataset.recall, r.ratio_f1h_f1);
  return out;
}

std::string format_key_values(const MetricReport& r) {
  std::ostringstream out;
  out << "images=" << r.images.size() << "\n";
  out << "dataset.f1h=" << number(r.dataset.f1h) << "\n";
  out << "dataset.f1=" << number(r.dataset.f1) << "\n";
  out << "dataset.precision=" << number(r.dataset.precision) << "\n";
  out << "dataset.recall=" << number(r.dataset.recall) << "\n";
  out << "dataset.ratio_f1h_f1=" << number(r.ratio_f1h_f1) << "\n";
  for (std::size_t c = 0; c < 3; ++c) {
    const ClassMetrics& m = r.per_class[c];
    const std::string key = "class." + imagery::to_string(imagery::kLabelledClasses[c]);
    out << key << ".defined=" << (m.defined ? 1 : 0) << "\n";
    if (!m.defined) continue;
    out << key << ".f1h=" << number(m.f1h) << "\n";
    out << key << ".f1=" << number(m.f1) << "\n";
    out << key << ".precision=" << number(m.precision) << "\n";
    out << key << ".recall=" << number(m.recall) << "\n";
    out << key << ".r_h=" << number(m.r_h) << "\n";
  }
  for (std::size_t i = 0; i < r.images.size(); ++i) {
    const ImageEvaluation& ev = r.images[i];
    const std::string key = "image." + std::to_string(i);
    out << key << ".id=" << ev.id << "\n";
    out << key << ".f1h=" << number(ev.average.f1h) << "\n";
    out << key << ".f1=" << number(ev.average.f1) << "\n";
    out << key << ".precision=" << number(ev.average.precision) << "\n";
    out << key << ".recall=" << number(ev.average.recall) << "\n";
    out << key << ".ratio_f1h_f1=" << number(ev.ratio_f1h_f1) << "\n";
    for (std::size_t c = 0; c < 3; ++c) {
      const ClassMetrics& m = ev.per_class[c];
      if (!m.defined) continue;
      out << key << "." << imagery::to_string(imagery::kLabelledClasses[c]) << ".f1h=" << number(m.f1h) << "\n";
    }
  }
  return out.str();
}

void write_report(const std::filesystem::path& dir, const MetricReport& report) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.txt", format_table(report));
  write_file(dir / "report.kv", format_key_values(report));
}

}  // namespace smokeseg::metrics
