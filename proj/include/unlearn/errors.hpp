// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unlearn {

enum class ErrorCode {
  NameCollision,
  LayoutMismatch,
  NonFiniteLoss,
  SpecError,
  TrainingDiverged,
  UnknownInstance,
  EditInvalid,
  NotAtOptimum,
  SolverDiverged,
  NotPositiveDefinite,
  SeriesDiverged,
  SingularSystem,
  RequestTooLarge,
  NothingToCorrupt,
  BaselineDiverged,
  InvalidData,
  ConfigError,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

/// Domain error raised by every module. The code is stable and machine-readable;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace unlearn
