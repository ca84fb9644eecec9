// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "unlearn/dataset.hpp"
#include "unlearn/models.hpp"
#include "unlearn/parameter_vector.hpp"
#include "unlearn/solver.hpp"
#include "unlearn/tasks.hpp"

namespace unlearn {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Serializes with every floating-point number written as 17 significant
/// digits in exponent form, so doubles round-trip exactly. Object keys are
/// sorted; output is byte-stable for equal input.
std::string dump_json(const json& value, int indent = 2);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Throws ConfigError naming the first key of `object` not in `allowed`.
void require_known_keys(const json& object, std::initializer_list<std::string_view> allowed,
                        std::string_view context);

/// Fetches `key` as T with a ConfigError (not a json exception) on mismatch.
template <class T>
T get_as(const json& object, std::string_view key, std::string_view context);

template <class T>
T get_or(const json& object, std::string_view key, const T& fallback, std::string_view context) {
  if (!object.contains(key)) return fallback;
  return get_as<T>(object, key, context);
}

json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const json& j);

json train_config_to_json(const TrainConfig& cfg);
/// Missing keys keep the values of `base`.
TrainConfig train_config_from_json(const json& j, TrainConfig base);

json solve_config_to_json(const SolveConfig& cfg);
SolveConfig solve_config_from_json(const json& j, SolveConfig base = {});

json layout_to_json(const Layout& layout);
LayoutPtr layout_from_json(const json& j);

json values_to_json(std::span<const double> values);
Reals values_from_json(const json& j, std::string_view context);

json label_to_json(const Label& label);
Label label_from_json(const json& j, std::string_view context);

/// {"task": "IR"|"QM"|"RC", "targets": [...]}: IR targets are ids, QM targets
/// are {"id", "new_features"}, RC targets are {"id", "new_label"}.
json request_to_json(const UnlearnRequest& req);
UnlearnRequest request_from_json(const json& j);

/// Report fields except wall-clock time, which callers record separately so
/// report files stay byte-stable across identical runs.
json solve_report_to_json(const DeltaSolveReport& report, bool include_timing = false);

}  // namespace unlearn
