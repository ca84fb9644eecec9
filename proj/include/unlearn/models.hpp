// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <variant>

#include "unlearn/dataset.hpp"
#include "unlearn/diff.hpp"
#include "unlearn/parameter_vector.hpp"

namespace unlearn {

// Regularization: `l2` is the strength of (l2/2)||theta||^2 over the whole
// training sum. Each instance carries an equal 1/reg_count share of it, so the
// empirical risk stays an exact mean of per-instance losses. reg_count == 0
// means "not yet bound"; train() binds it to the training set size and the
// bound value travels with the checkpoint, so retraining on an edited set and
// influence deltas both see the same per-instance objective.

/// Binary logistic regression with bias. p = d + 1.
struct LogisticRegressionSpec {
  std::size_t d = 0;
  double l2 = 1.0;
  std::size_t reg_count = 0;

  bool operator==(const LogisticRegressionSpec&) const = default;
};

/// Multinomial logistic regression. p = (d + 1) * classes. Two classes use
/// binary labels.
struct SoftmaxRegressionSpec {
  std::size_t d = 0;
  int classes = 2;
  double l2 = 1.0;
  std::size_t reg_count = 0;

  bool operator==(const SoftmaxRegressionSpec&) const = default;
};

/// One tanh hidden layer whose frozen weight W0 (hidden x d) is adapted by a
/// trainable low-rank product A * B, followed by a trainable softmax head.
/// p = rank * (hidden + d) + (hidden + 1) * classes.
struct LowRankAdapterNetSpec {
  std::size_t d = 0;
  std::size_t hidden = 0;
  int classes = 2;
  std::size_t rank = 1;
  double l2 = 0.0;
  std::size_t reg_count = 0;
  std::uint64_t backbone_seed = 0;

  bool operator==(const LowRankAdapterNetSpec&) const = default;
};

using ModelSpec = std::variant<LogisticRegressionSpec, SoftmaxRegressionSpec, LowRankAdapterNetSpec>;

std::string_view model_kind(const ModelSpec& spec);
void validate_spec(const ModelSpec& spec);
std::size_t trainable_count(const ModelSpec& spec);
std::size_t input_dim(const ModelSpec& spec);
LabelSpec label_spec_of(const ModelSpec& spec);
bool is_convex(const ModelSpec& spec);

/// Per-instance coefficient of the L2 term: l2 / max(reg_count, 1).
double per_instance_l2(const ModelSpec& spec);
/// Sets reg_count to n when it is still unbound.
ModelSpec bind_regularization(ModelSpec spec, std::size_t n);

/// Trainable layout for a spec.
LayoutPtr parameter_layout(const ModelSpec& spec);
/// Frozen backbone for a spec: W0 drawn from backbone_seed for the adapter
/// net, an empty vector for the convex models.
ParameterVector make_backbone(const ModelSpec& spec);
/// Seeded initialization. Adapter net: A ~ N(0, 0.1^2), B = 0, head
/// ~ N(0, 0.1^2), head bias 0. Convex models: N(0, 0.01^2).
ParameterVector initial_parameters(const ModelSpec& spec, std::uint64_t seed);

/// Throws SpecError on an invalid spec.
std::unique_ptr<DiffModel> make_model(const ModelSpec& spec);
std::unique_ptr<DiffModel> make_model(const ModelSpec& spec, const ParameterVector& frozen_base);

enum class TrainOptimizer { gd, adam };

/// Full-batch training settings. One epoch is one step on the full gradient.
struct TrainConfig {
  TrainOptimizer optimizer = TrainOptimizer::gd;
  double lr = 1.0;
  std::size_t max_epochs = 20000;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const TrainConfig&) const = default;
};

/// Defaults per model family: gd with tol 1e-8 for convex models, adam with
/// tol 1e-5 for the adapter net.
TrainConfig default_train_config(const ModelSpec& spec);

struct TrainedModel {
  ModelSpec spec;
  ParameterVector frozen_base;
  ParameterVector adapter;
  TrainConfig train_config;
  bool converged = false;
  double final_grad_norm = 0.0;
  std::size_t epochs = 0;

  std::unique_ptr<DiffModel> model() const { return make_model(spec, frozen_base); }
};

/// Minimizes the empirical risk from initial_parameters(spec, cfg.seed).
/// Deterministic given the seed. Throws TrainingDiverged on non-finite
/// iterates.
TrainedModel train(const ModelSpec& spec, const Dataset& data, const TrainConfig& cfg);

/// Same, starting from an explicit adapter value.
TrainedModel train_from(const ModelSpec& spec, const Dataset& data, const TrainConfig& cfg,
                        ParameterVector init);

/// ||grad R(Z; theta)||_2 with R the mean per-instance loss.
double risk_grad_norm(const DiffModel& model, const Dataset& data, const ParameterVector& theta);

}  // namespace unlearn
