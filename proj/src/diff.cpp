// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/diff.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "unlearn/errors.hpp"

namespace unlearn {

double DiffModel::loss(const Instance& z, const ParameterVector& theta) const {
  check_params(theta);
  check_instance(z);
  return loss(z, theta.values());
}

ParameterVector DiffModel::grad(const Instance& z, const ParameterVector& theta) const {
  check_params(theta);
  check_instance(z);
  auto out = ParameterVector::zeros(layout());
  accumulate_grad(z, theta.values(), 1.0, out.mutable_values());
  return out;
}

ParameterVector DiffModel::hvp(const Instance& z, const ParameterVector& theta,
                               const ParameterVector& v) const {
  check_params(theta);
  check_params(v);
  check_instance(z);
  auto out = ParameterVector::zeros(layout());
  accumulate_hvp(z, theta.values(), v.values(), 1.0, out.mutable_values());
  return out;
}

void DiffModel::check_params(const ParameterVector& theta) const {
  if (!same_layout(theta.layout_ptr(), layout())) {
    throw Error(ErrorCode::LayoutMismatch,
                fmt::format("parameter vector of size {} does not match model layout of size {}",
                            theta.size(), num_params()));
  }
}

void DiffModel::check_instance(const Instance& z) const {
  if (z.features.size() != input_dim()) {
    throw Error(ErrorCode::LayoutMismatch,
                fmt::format("instance {} has {} features, model expects {}", z.id,
                            z.features.size(), input_dim()));
  }
  if (!label_matches(label_spec(), z.label)) {
    throw Error(ErrorCode::EditInvalid,
                fmt::format("instance {} label {} does not fit the model", z.id,
                            label_to_string(z.label)));
  }
}

ParameterVector batch_grad(const DiffModel& model, std::span<const Instance> batch,
                           const ParameterVector& theta) {
  if (batch.empty()) throw Error(ErrorCode::InvalidData, "batch_grad needs a nonempty batch");
  model.check_params(theta);
  for (const auto& z : batch) model.check_instance(z);
  auto out = ParameterVector::zeros(model.layout());
  accumulate_batch_grad(model, batch, theta.values(), 1.0, out.mutable_values());
  return out;
}

ParameterVector batch_hvp(const DiffModel& model, std::span<const Instance> batch,
                          const ParameterVector& theta, const ParameterVector& v) {
  if (batch.empty()) throw Error(ErrorCode::InvalidData, "batch_hvp needs a nonempty batch");
  model.check_params(theta);
  model.check_params(v);
  for (const auto& z : batch) model.check_instance(z);
  auto out = ParameterVector::zeros(model.layout());
  auto acc = out.mutable_values();
  for (const auto& z : batch) model.accumulate_hvp(z, theta.values(), v.values(), 1.0, acc);
  return out;
}

void accumulate_batch_hvp(const DiffModel& model, std::span<const Instance> data,
                          std::span<const std::size_t> indices, std::span<const double> theta,
                          std::span<const double> v, double weight, std::span<double> out) {
  for (auto i : indices) model.accumulate_hvp(data[i], theta, v, weight, out);
}

void accumulate_batch_grad(const DiffModel& model, std::span<const Instance> data,
                           std::span<const double> theta, double weight, std::span<double> out) {
  for (const auto& z : data) model.accumulate_grad(z, theta, weight, out);
}

double empirical_risk(const DiffModel& model, std::span<const Instance> data,
                      std::span<const double> theta) {
  double total = 0.0;
  for (const auto& z : data) total += model.loss(z, theta);
  return total / static_cast<double>(data.size());
}

double fd_grad_check(const DiffModel& model, const Instance& z, const ParameterVector& theta,
                     double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidData, "finite-difference step must be positive");
  const auto analytic = model.grad(z, theta);
  Reals probe(theta.values().begin(), theta.values().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = model.loss(z, probe);
    probe[i] = saved - h;
    const double down = model.loss(z, probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::NonFiniteLoss,
                  fmt::format("loss is not finite around coordinate {}", i));
    }
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

double fd_hvp_check(const DiffModel& model, const Instance& z, const ParameterVector& theta,
                    const ParameterVector& v, double h) {
  const auto analytic = model.hvp(z, theta, v);
  const auto up = model.grad(z, axpy(h, v, theta));
  const auto down = model.grad(z, axpy(-h, v, theta));
  double err = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double numeric = (up[i] - down[i]) / (2.0 * h);
    err += (numeric - analytic[i]) * (numeric - analytic[i]);
  }
  return std::sqrt(err) / std::max(norm2(analytic.values()), 1e-8);
}

}  // namespace unlearn
