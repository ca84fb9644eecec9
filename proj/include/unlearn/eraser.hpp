// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "unlearn/dataset.hpp"
#include "unlearn/json_io.hpp"
#include "unlearn/models.hpp"
#include "unlearn/solver.hpp"
#include "unlearn/tasks.hpp"

namespace unlearn {

struct EraserOptions {
  SolveMethod method = SolveMethod::minibatch;
  SolveConfig solve;
  double max_fraction = 0.5;   // larger requests are refused
  double warn_fraction = 0.1;  // larger requests add a warning
  bool force = false;          // build b even when the source is not converged
};

struct UnlearnOutcome {
  TrainedModel new_model;
  DeltaSolveReport solve_report;
  std::string request_digest;
  std::string lineage;  // model_digest of the source
  std::vector<std::string> warnings;
};

/// Solves for delta at the source's current adapter and returns the source
/// with adapter + delta. The reported delta is new adapter - old adapter
/// evaluated in floating point, so the two always agree exactly. The new
/// model's converged flag and grad norm describe the edited dataset.
UnlearnOutcome unlearn(const TrainedModel& trained, const Dataset& data,
                       const UnlearnRequest& req, const EraserOptions& opts = {});

/// -eps * (H + damping I)^-1 grad L(z) at the trained adapter. z need not be in
/// data. Requires |eps| <= 10 / n.
ParameterVector upweight_delta(const TrainedModel& trained, const Dataset& data,
                               const Instance& z, double eps, const EraserOptions& opts = {});

/// SHA-256 of the canonical (id-sorted) request JSON.
std::string request_digest(const UnlearnRequest& req);

/// {lineage, request_digest, solve_report, checkpoint, warnings}; wall-clock
/// time is left out so equal runs serialize identically.
json outcome_to_json(const UnlearnOutcome& outcome, const std::string& manifest_digest = {});

/// SHA-256 of outcome_to_json without a manifest digest.
std::string outcome_digest(const UnlearnOutcome& outcome);

}  // namespace unlearn
