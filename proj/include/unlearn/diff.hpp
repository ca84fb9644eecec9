// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "unlearn/dataset.hpp"
#include "unlearn/parameter_vector.hpp"

namespace unlearn {

/// A twice-differentiable per-instance loss L(z; theta) with closed-form
/// gradient and Hessian-vector product.
///
/// Implementations are stateless given (z, theta) and safe to call
/// concurrently. The accumulate_* forms add `weight` times the result into
/// `out`, so batch sums never need a per-instance p-sized temporary.
class DiffModel {
 public:
  virtual ~DiffModel() = default;

  virtual const LayoutPtr& layout() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual LabelSpec label_spec() const = 0;

  virtual double loss(const Instance& z, std::span<const double> theta) const = 0;
  virtual void accumulate_grad(const Instance& z, std::span<const double> theta, double weight,
                               std::span<double> out) const = 0;
  virtual void accumulate_hvp(const Instance& z, std::span<const double> theta,
                              std::span<const double> v, double weight,
                              std::span<double> out) const = 0;

  /// Class-1 probability for binary models, class probabilities for
  /// multiclass models.
  virtual Reals predict(std::span<const double> features,
                        std::span<const double> theta) const = 0;

  std::size_t num_params() const { return layout()->size(); }

  double loss(const Instance& z, const ParameterVector& theta) const;
  ParameterVector grad(const Instance& z, const ParameterVector& theta) const;
  ParameterVector hvp(const Instance& z, const ParameterVector& theta,
                      const ParameterVector& v) const;

  /// Throws LayoutMismatch unless theta was laid out by this model.
  void check_params(const ParameterVector& theta) const;
  /// Throws LayoutMismatch/EditInvalid when z does not fit the model's input.
  void check_instance(const Instance& z) const;
};

/// Sum (not mean) of per-instance gradients, accumulated in batch order.
ParameterVector batch_grad(const DiffModel& model, std::span<const Instance> batch,
                           const ParameterVector& theta);

/// Sum of per-instance Hessian-vector products. Auxiliary storage is the
/// output plus whatever O(1)-in-p scratch the model needs.
ParameterVector batch_hvp(const DiffModel& model, std::span<const Instance> batch,
                          const ParameterVector& theta, const ParameterVector& v);

/// Adds weight * sum_{i in indices} hvp(data[i], theta, v) into out.
void accumulate_batch_hvp(const DiffModel& model, std::span<const Instance> data,
                          std::span<const std::size_t> indices, std::span<const double> theta,
                          std::span<const double> v, double weight, std::span<double> out);

/// Adds weight * sum of all per-instance gradients into out.
void accumulate_batch_grad(const DiffModel& model, std::span<const Instance> data,
                           std::span<const double> theta, double weight, std::span<double> out);

/// Mean loss over the data (the empirical risk).
double empirical_risk(const DiffModel& model, std::span<const Instance> data,
                      std::span<const double> theta);

/// Largest coordinate-wise relative error between the analytic gradient and a
/// central difference with step h. Denominators are floored at 1e-8.
double fd_grad_check(const DiffModel& model, const Instance& z, const ParameterVector& theta,
                     double h);

/// Relative L2 error between hvp(z, theta, v) and the central difference
/// (grad(theta + h v) - grad(theta - h v)) / 2h.
double fd_hvp_check(const DiffModel& model, const Instance& z, const ParameterVector& theta,
                    const ParameterVector& v, double h);

}  // namespace unlearn
