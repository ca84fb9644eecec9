// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only models and fixtures.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "unlearn/dataset.hpp"
#include "unlearn/diff.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/models.hpp"
#include "unlearn/parameter_vector.hpp"

namespace unlearn::testing {

// L(z; theta) = 1/2 sum_k diag_k theta_k^2 - <x, theta>. Every instance has
// Hessian diag(diag); a zero diagonal gives a loss linear in theta.
class QuadraticModel final : public DiffModel {
 public:
  explicit QuadraticModel(std::vector<double> diag)
      : diag_(std::move(diag)), layout_(Layout::make({{"theta", {diag_.size()}}})) {}

  const LayoutPtr& layout() const override { return layout_; }
  std::size_t input_dim() const override { return diag_.size(); }
  LabelSpec label_spec() const override { return {LabelKind::real, 0}; }

  double loss(const Instance& z, std::span<const double> theta) const override {
    double s = 0.0;
    for (std::size_t k = 0; k < diag_.size(); ++k) {
      s += 0.5 * diag_[k] * theta[k] * theta[k] - z.features[k] * theta[k];
    }
    return s;
  }
  void accumulate_grad(const Instance& z, std::span<const double> theta, double weight,
                       std::span<double> out) const override {
    for (std::size_t k = 0; k < diag_.size(); ++k) {
      out[k] += weight * (diag_[k] * theta[k] - z.features[k]);
    }
  }
  void accumulate_hvp(const Instance&, std::span<const double>, std::span<const double> v,
                      double weight, std::span<double> out) const override {
    for (std::size_t k = 0; k < diag_.size(); ++k) out[k] += weight * diag_[k] * v[k];
  }
  Reals predict(std::span<const double>, std::span<const double>) const override { return {}; }

 private:
  std::vector<double> diag_;
  LayoutPtr layout_;
};

// Code of the unlearn::Error thrown by f, or nullopt when f returns normally
// or throws something else.
template <class F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  } catch (...) {
  }
  return std::nullopt;
}

inline Dataset quadratic_data(std::size_t p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(p);
    for (auto& v : x) v = normal(rng);
    out.push_back(Instance{i, std::move(x), 0.0});
  }
  return Dataset(p, LabelSpec{LabelKind::real, 0}, std::move(out));
}

// A converged TrainedModel wrapper around an explicit theta, for driving the
// solvers with a test-only model. The spec is a placeholder.
inline TrainedModel at_point(ParameterVector theta) {
  TrainedModel t;
  t.spec = LogisticRegressionSpec{theta.size() > 1 ? theta.size() - 1 : 1, 1.0, 1};
  t.adapter = std::move(theta);
  t.converged = true;
  return t;
}

inline ParameterVector random_vector(const LayoutPtr& layout, std::uint64_t seed,
                                     double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  auto v = ParameterVector::zeros(layout);
  for (auto& x : v.mutable_values()) x = normal(rng);
  return v;
}

inline double rel_l2(std::span<const double> a, std::span<const double> ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ref[i]) * (a[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num) / std::sqrt(den);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool bit_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

// Small instances of every model family, including a binary adapter net.
inline std::vector<ModelSpec> small_zoo() {
  return {LogisticRegressionSpec{5, 1.0, 20}, SoftmaxRegressionSpec{4, 3, 1.0, 20},
          LowRankAdapterNetSpec{6, 5, 3, 2, 0.1, 20, 17},
          LowRankAdapterNetSpec{4, 6, 2, 1, 0.0, 20, 5}};
}

// Gaussian features with labels drawn to fit the spec.
inline Dataset zoo_data(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto labels = label_spec_of(spec);
  std::uniform_int_distribution<int> pick(0, labels.classes - 1);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(input_dim(spec));
    for (auto& v : x) v = normal(rng);
    out.push_back(Instance{i, std::move(x), pick(rng)});
  }
  return Dataset(input_dim(spec), labels, std::move(out));
}

// Parameters away from the origin so every block (including the adapter's B)
// is active.
inline ParameterVector random_point(const ModelSpec& spec, std::uint64_t seed,
                                    double scale = 0.5) {
  return random_vector(parameter_layout(spec), seed, scale);
}

}  // namespace unlearn::testing
