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

#include <iosfwd>
#include <string>
#include <vector>

#include "smokeseg/cli/run_config.hpp"

namespace smokeseg::cli {

inline const std::vector<std::string> kCommands{"synth", "rasterize", "train", "evaluate", "predict", "ablate"};

/// Each command reads its settings from `cfg`, writes its outputs and
/// resolved.cfg under `out`, and reports progress on `log`. Failures are
/// thrown as smokeseg::Error subclasses.
void cmd_synth(const RunConfig& cfg, std::ostream& log);
void cmd_rasterize(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_evaluate(const RunConfig& cfg, std::ostream& log);
void cmd_predict(const RunConfig& cfg, std::ostream& log);
void cmd_ablate(const RunConfig& cfg, std::ostream& log);

/// Dispatches by name; throws ConfigError for an unknown command.
void run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

/// Dispatches and maps errors to the exit-code convention, printing the
/// message on `err`. Returns 0 on success.
int run_command_guarded(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace smokeseg::cli
