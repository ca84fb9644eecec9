// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "unlearn/dataset.hpp"
#include "unlearn/diff.hpp"
#include "unlearn/models.hpp"
#include "unlearn/parameter_vector.hpp"

namespace unlearn {

enum class TaskKind { IR, QM, RC };

std::string_view task_name(TaskKind task);
TaskKind task_from_name(std::string_view name);

/// Instance removal: delete the targets outright.
struct InstanceRemoval {
  std::vector<InstanceId> target_ids;
  bool operator==(const InstanceRemoval&) const = default;
};

struct QueryEdit {
  InstanceId id = 0;
  std::vector<double> new_features;
  bool operator==(const QueryEdit&) const = default;
};

/// Query modification: replace x by x + delta_x, keep y.
struct QueryModification {
  std::vector<QueryEdit> edits;
  bool operator==(const QueryModification&) const = default;
};

struct ResponseEdit {
  InstanceId id = 0;
  Label new_label = 0;
  bool operator==(const ResponseEdit&) const = default;
};

/// Response correction: replace y by y + delta_y, keep x.
struct ResponseCorrection {
  std::vector<ResponseEdit> edits;
  bool operator==(const ResponseCorrection&) const = default;
};

using UnlearnRequest = std::variant<InstanceRemoval, QueryModification, ResponseCorrection>;

TaskKind task_of(const UnlearnRequest& req);
std::size_t request_size(const UnlearnRequest& req);
/// Target ids in ascending order.
std::vector<InstanceId> request_ids(const UnlearnRequest& req);
/// Copy with targets sorted by ascending id.
UnlearnRequest canonicalize(const UnlearnRequest& req);

/// Throws UnknownInstance, EditInvalid (duplicate id, wrong dimension or label
/// kind) or RequestTooLarge (touches every instance).
void validate_request(const UnlearnRequest& req, const Dataset& data);

/// The dataset the request describes: targets removed (IR) or edited (QM/RC).
Dataset apply_request(const Dataset& data, const UnlearnRequest& req);

/// Right-hand side of H * delta = b for one request, built at the trained
/// parameters:
///   IR: b = (1/n) sum_{z in S} G(z)
///   QM: b = (1/n) [sum G(x, y) - sum G(x', y)]
///   RC: b = (1/n) [sum G(x, y) - sum G(x, y')]
/// where G is the per-instance gradient. The delta is applied by addition.
struct BVector {
  ParameterVector b;
  TaskKind task = TaskKind::IR;
  std::size_t n = 0;
};

/// Throws NotAtOptimum when the model is not converged and force is false.
BVector build_b(const DiffModel& model, const TrainedModel& trained, const Dataset& data,
                const UnlearnRequest& req, bool force = false);

}  // namespace unlearn
