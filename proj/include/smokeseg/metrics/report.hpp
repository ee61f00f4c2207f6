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

#include <filesystem>
#include <string>

#include "smokeseg/metrics/metrics.hpp"

namespace smokeseg::metrics {

/// Fixed-width text table: one row per image (F1h, F1, Prec, Rec, F1h/F1)
/// followed by per-class and dataset rows.
std::string format_table(const MetricReport& report);

/// Machine-readable "key=value" lines ("dataset.f1h=0.431034...").
std::string format_key_values(const MetricReport& report);

/// Writes <dir>/report.txt and <dir>/report.kv.
void write_report(const std::filesystem::path& dir, const MetricReport& report);

}  // namespace smokeseg::metrics
