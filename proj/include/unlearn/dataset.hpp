// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace unlearn {

enum class LabelKind { binary, multiclass, real };

struct LabelSpec {
  LabelKind kind = LabelKind::binary;
  int classes = 2;  // meaningful for multiclass; binary is always 2

  bool operator==(const LabelSpec&) const = default;
};

/// Discrete labels (binary or class index) are integers, regression targets
/// are reals.
using Label = std::variant<int, double>;

bool label_matches(const LabelSpec& spec, const Label& label);
int class_index(const Label& label);
std::string label_to_string(const Label& label);
std::string_view label_kind_name(LabelKind kind);
LabelKind label_kind_from_name(std::string_view name);

using InstanceId = std::uint64_t;

struct Instance {
  InstanceId id = 0;
  std::vector<double> features;
  Label label = 0;

  bool operator==(const Instance&) const = default;
};

/// Immutable, validated collection of instances with unique ids.
class Dataset {
 public:
  /// Throws InvalidData when n == 0, a feature vector has the wrong
  /// dimension, a label does not fit the label spec, or ids repeat.
  Dataset(std::size_t d, LabelSpec label_spec, std::vector<Instance> instances);

  std::size_t n() const { return instances_.size(); }
  std::size_t d() const { return d_; }
  const LabelSpec& label_spec() const { return label_spec_; }
  std::span<const Instance> instances() const { return instances_; }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }

  std::optional<std::size_t> index_of(InstanceId id) const;
  const Instance* find(InstanceId id) const;

  /// Same d and label spec, different instances.
  Dataset with_instances(std::vector<Instance> instances) const;

 private:
  std::size_t d_;
  LabelSpec label_spec_;
  std::vector<Instance> instances_;
  std::unordered_map<InstanceId, std::size_t> index_;
};

}  // namespace unlearn
