// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "unlearn/json_io.hpp"
#include "unlearn/models.hpp"

namespace unlearn {

/// {format_version, model_spec, layout, frozen_base, adapter, train_config,
/// converged, final_grad_norm}, plus manifest_digest when non-empty.
json checkpoint_to_json(const TrainedModel& trained, const std::string& manifest_digest = {});

/// Rejects unknown keys, a format_version other than 1, and an adapter whose
/// length or layout disagrees with the spec.
TrainedModel checkpoint_from_json(const json& j);

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& trained,
                     const std::string& manifest_digest = {});
TrainedModel load_checkpoint(const std::filesystem::path& path);

/// SHA-256 of the canonical checkpoint text without a manifest digest. Used as
/// the lineage id of models derived from this one.
std::string model_digest(const TrainedModel& trained);

}  // namespace unlearn
