// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/dataset.hpp"

#include <cmath>

#include <fmt/format.h>

#include "unlearn/errors.hpp"

namespace unlearn {

bool label_matches(const LabelSpec& spec, const Label& label) {
  switch (spec.kind) {
    case LabelKind::binary: {
      const auto* v = std::get_if<int>(&label);
      return v != nullptr && (*v == 0 || *v == 1);
    }
    case LabelKind::multiclass: {
      const auto* v = std::get_if<int>(&label);
      return v != nullptr && *v >= 0 && *v < spec.classes;
    }
    case LabelKind::real: {
      const auto* v = std::get_if<double>(&label);
      return v != nullptr && std::isfinite(*v);
    }
  }
  return false;
}

int class_index(const Label& label) {
  if (const auto* v = std::get_if<int>(&label)) return *v;
  throw Error(ErrorCode::InvalidData, "expected a discrete label");
}

std::string label_to_string(const Label& label) {
  if (const auto* v = std::get_if<int>(&label)) return std::to_string(*v);
  return fmt::format("{:.17g}", std::get<double>(label));
}

std::string_view label_kind_name(LabelKind kind) {
  switch (kind) {
    case LabelKind::binary: return "binary";
    case LabelKind::multiclass: return "multiclass";
    case LabelKind::real: return "real";
  }
  return "binary";
}

LabelKind label_kind_from_name(std::string_view name) {
  if (name == "binary") return LabelKind::binary;
  if (name == "multiclass") return LabelKind::multiclass;
  if (name == "real") return LabelKind::real;
  throw Error(ErrorCode::ConfigError, fmt::format("unknown label kind '{}'", name));
}

Dataset::Dataset(std::size_t d, LabelSpec label_spec, std::vector<Instance> instances)
    : d_(d), label_spec_(label_spec), instances_(std::move(instances)) {
  if (label_spec_.kind == LabelKind::binary) label_spec_.classes = 2;
  if (label_spec_.kind == LabelKind::multiclass && label_spec_.classes < 2) {
    throw Error(ErrorCode::InvalidData, "multiclass label spec needs at least 2 classes");
  }
  if (instances_.empty()) throw Error(ErrorCode::InvalidData, "dataset must be nonempty");
  index_.reserve(instances_.size());
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& z = instances_[i];
    if (z.features.size() != d_) {
      throw Error(ErrorCode::InvalidData,
                  fmt::format("instance {} has {} features, dataset declares {}", z.id,
                              z.features.size(), d_));
    }
    for (double x : z.features) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::InvalidData, fmt::format("instance {} has a non-finite feature", z.id));
      }
    }
    if (!label_matches(label_spec_, z.label)) {
      throw Error(ErrorCode::InvalidData,
                  fmt::format("instance {} has label {} which does not fit {} labels", z.id,
                              label_to_string(z.label), label_kind_name(label_spec_.kind)));
    }
    if (!index_.emplace(z.id, i).second) {
      throw Error(ErrorCode::InvalidData, fmt::format("duplicate instance id {}", z.id));
    }
  }
}

std::optional<std::size_t> Dataset::index_of(InstanceId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Instance* Dataset::find(InstanceId id) const {
  auto i = index_of(id);
  return i ? &instances_[*i] : nullptr;
}

Dataset Dataset::with_instances(std::vector<Instance> instances) const {
  return Dataset(d_, label_spec_, std::move(instances));
}

}  // namespace unlearn
