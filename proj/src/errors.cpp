// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/errors.hpp"

namespace unlearn {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::SpecError: return "SpecError";
    case ErrorCode::TrainingDiverged: return "TrainingDiverged";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::EditInvalid: return "EditInvalid";
    case ErrorCode::NotAtOptimum: return "NotAtOptimum";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SeriesDiverged: return "SeriesDiverged";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::RequestTooLarge: return "RequestTooLarge";
    case ErrorCode::NothingToCorrupt: return "NothingToCorrupt";
    case ErrorCode::BaselineDiverged: return "BaselineDiverged";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace unlearn
