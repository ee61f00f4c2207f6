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

#include <stdexcept>
#include <string>

namespace smokeseg {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with input data: files, rasters, labels, manifests.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class BandCountError : public DataError {
 public:
  using DataError::DataError;
};

class DataIntegrityError : public DataError {
 public:
  using DataError::DataError;
};

class LabelSchemaError : public DataError {
 public:
  using DataError::DataError;
};

class PairingError : public DataError {
 public:
  using DataError::DataError;
};

class ContractError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyEvaluationError : public DataError {
 public:
  using DataError::DataError;
};

// Problems with what the caller asked for: names, configs, graph wiring.
class UsageError : public Error {
 public:
  using Error::Error;
};

class ModelNameError : public UsageError {
 public:
  using UsageError::UsageError;
};

class GraphShapeError : public UsageError {
 public:
  using UsageError::UsageError;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public TrainingError {
 public:
  TrainingDivergedError(const std::string& what, int epoch)
      : TrainingError(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class AllSessionsFailedError : public TrainingError {
 public:
  using TrainingError::TrainingError;
};

/// Process exit code for an error, following the CLI convention
/// (2 usage/config, 3 data, 4 training divergence).
int exit_code_for(const Error& error) noexcept;

}  // namespace smokeseg
