// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/checkpoint.hpp"

#include <fmt/format.h>

#include "unlearn/digest.hpp"
#include "unlearn/errors.hpp"

namespace unlearn {

json checkpoint_to_json(const TrainedModel& trained, const std::string& manifest_digest) {
  json out{{"format_version", kFormatVersion},
           {"model_spec", model_spec_to_json(trained.spec)},
           {"layout", layout_to_json(trained.adapter.layout())},
           {"frozen_base", values_to_json(trained.frozen_base.values())},
           {"adapter", values_to_json(trained.adapter.values())},
           {"train_config", train_config_to_json(trained.train_config)},
           {"converged", trained.converged},
           {"final_grad_norm", trained.final_grad_norm}};
  if (!manifest_digest.empty()) out["manifest_digest"] = manifest_digest;
  return out;
}

TrainedModel checkpoint_from_json(const json& j) {
  constexpr std::string_view ctx = "checkpoint";
  require_known_keys(j,
                     {"format_version", "model_spec", "layout", "frozen_base", "adapter",
                      "train_config", "converged", "final_grad_norm", "manifest_digest"},
                     ctx);
  const int version = get_as<int>(j, "format_version", ctx);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("checkpoint: unsupported format_version {}", version));
  }
  TrainedModel t;
  t.spec = model_spec_from_json(j.at("model_spec"));
  const auto layout = layout_from_json(j.at("layout"));
  const auto expected = parameter_layout(t.spec);
  if (!(*layout == *expected)) {
    throw Error(ErrorCode::LayoutMismatch, "checkpoint: layout disagrees with model_spec");
  }
  auto adapter = values_from_json(j.at("adapter"), ctx);
  if (adapter.size() != expected->size()) {
    throw Error(ErrorCode::LayoutMismatch,
                fmt::format("checkpoint: adapter has {} values, spec declares {}", adapter.size(),
                            expected->size()));
  }
  t.adapter = ParameterVector(expected, std::move(adapter));

  auto base = make_backbone(t.spec);
  auto stored = values_from_json(j.at("frozen_base"), ctx);
  if (stored.size() != base.size()) {
    throw Error(ErrorCode::LayoutMismatch, "checkpoint: frozen_base length disagrees with spec");
  }
  t.frozen_base = ParameterVector(base.layout_ptr(), std::move(stored));

  t.train_config = train_config_from_json(j.at("train_config"), default_train_config(t.spec));
  t.converged = get_as<bool>(j, "converged", ctx);
  t.final_grad_norm = j.at("final_grad_norm").is_null()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : get_as<double>(j, "final_grad_norm", ctx);
  return t;
}

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& trained,
                     const std::string& manifest_digest) {
  write_text_file(path, dump_json(checkpoint_to_json(trained, manifest_digest)));
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_json_file(path));
}

std::string model_digest(const TrainedModel& trained) {
  return sha256_hex(dump_json(checkpoint_to_json(trained), -1));
}

}  // namespace unlearn
