// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "unlearn/dataset.hpp"
#include "unlearn/diff.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/models.hpp"
#include "unlearn/tasks.hpp"

namespace unlearn {

enum class SolveMethod { minibatch, cg, lissa, dense };
enum class StepRule { adam, sgd };

std::string_view method_name(SolveMethod method);
SolveMethod method_from_name(std::string_view name);

/// Settings for the mini-batch solver, plus the knobs of the reference
/// solvers when they are reached through solve().
struct SolveConfig {
  StepRule optimizer = StepRule::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum = 0.0;  // sgd only
  double lr = 0.05;
  double lr_decay = 0.98;  // learning rate for epoch e is lr * lr_decay^(e-1)
  std::size_t batch_size = 50;
  std::size_t max_epochs = 300;
  double grad_tol = 1e-6;  // on the full-batch ||grad F||_2
  std::size_t check_every = 5;
  double damping = 1e-3;
  std::uint64_t seed = 0;

  double cg_tol = 1e-12;  // relative residual
  std::size_t cg_max_iters = 0;  // 0 means 2p
  double lissa_scale = 10.0;
  std::size_t lissa_depth = 1000;
  std::size_t lissa_repeats = 1;

  bool operator==(const SolveConfig&) const = default;
};

void validate_solve_config(const SolveConfig& cfg);

struct ResidualCheck {
  std::size_t epoch = 0;
  double grad_norm = 0.0;
};

struct DeltaSolveReport {
  ParameterVector delta;
  double residual_norm = 0.0;  // ||(H + damping I) delta - b||_2, full batch
  std::size_t iterations = 0;
  double wall_clock_s = 0.0;
  std::size_t peak_aux_floats = 0;  // Reals high-water mark during the solve
  SolveMethod method = SolveMethod::minibatch;
  bool converged = false;
  std::size_t hvp_evals = 0;  // per-instance Hessian-vector products
  double damping = 0.0;
  std::vector<ResidualCheck> trace;  // minibatch: full-batch checks by epoch
};

/// Raised when an iterate stops being finite; carries the last finite state.
class SolverError : public Error {
 public:
  SolverError(ErrorCode code, const std::string& message, std::optional<DeltaSolveReport> last)
      : Error(code, message), last_(std::move(last)) {}

  const std::optional<DeltaSolveReport>& last_state() const { return last_; }

 private:
  std::optional<DeltaSolveReport> last_;
};

/// Minimizes F(delta) = 1/2 delta^T (H + damping I) delta - <b, delta> with
/// H = (1/n) sum_i hess L_i at the trained parameters, by mini-batch Adam
/// (or SGD) over epoch-wise shuffles. Never forms H.
DeltaSolveReport solve_minibatch(const DiffModel& model, const TrainedModel& trained,
                                 const Dataset& data, const BVector& b, const SolveConfig& cfg);

/// Full-batch conjugate gradient on (H + damping I) delta = b. `tol` is on
/// the relative residual; max_iters == 0 means 2p.
DeltaSolveReport solve_cg(const DiffModel& model, const TrainedModel& trained, const Dataset& data,
                          const BVector& b, double damping, double tol, std::size_t max_iters);

struct LissaOptions {
  double damping = 1e-3;
  double scale = 10.0;
  std::size_t depth = 1000;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
};

/// Truncated Neumann-series estimate with single-instance HVP samples:
/// d_0 = b, d_j = b + (I - (H_i + damping I) / scale) d_{j-1}, result d / scale
/// averaged over repeats.
DeltaSolveReport solve_lissa(const DiffModel& model, const TrainedModel& trained,
                             const Dataset& data, const BVector& b, const LissaOptions& opts);

/// Largest p accepted by the dense oracle.
inline constexpr std::size_t kDenseMaxParams = 2000;

/// Validation oracle: materializes H column by column from full-batch HVPs and
/// solves with an LDL^T factorization.
DeltaSolveReport solve_dense(const DiffModel& model, const TrainedModel& trained,
                             const Dataset& data, const BVector& b, double damping);

/// Dispatches on method using the matching fields of cfg.
DeltaSolveReport solve(SolveMethod method, const DiffModel& model, const TrainedModel& trained,
                       const Dataset& data, const BVector& b, const SolveConfig& cfg);

/// Row-major p x p Hessian of the empirical risk built from e_k HVPs.
Reals dense_hessian(const DiffModel& model, const Dataset& data, const ParameterVector& theta);

/// ||(H + damping I) delta - b||_2 recomputed from scratch with full-batch HVPs.
double damped_residual_norm(const DiffModel& model, const Dataset& data,
                            const ParameterVector& theta, const ParameterVector& delta,
                            const ParameterVector& b, double damping);

/// F(delta) = 1/2 <delta, (H + damping I) delta> - <b, delta>.
double quadratic_objective(const DiffModel& model, const Dataset& data,
                           const ParameterVector& theta, const ParameterVector& delta,
                           const ParameterVector& b, double damping);

}  // namespace unlearn
