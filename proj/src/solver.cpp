// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace unlearn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// out = (1/n) sum_i hvp_i(v) + damping * v  (full batch)
void apply_damped_hessian(const DiffModel& model, std::span<const Instance> data,
                          std::span<const double> theta, std::span<const double> v, double damping,
                          std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double w = 1.0 / static_cast<double>(data.size());
  for (const auto& z : data) model.accumulate_hvp(z, theta, v, w, out);
  axpy_into(damping, v, out);
}

// out = (H + damping I) v - b; returns its norm.
double residual_into(const DiffModel& model, std::span<const Instance> data,
                     std::span<const double> theta, std::span<const double> v,
                     std::span<const double> b, double damping, std::span<double> out) {
  apply_damped_hessian(model, data, theta, v, damping, out);
  axpy_into(-1.0, b, out);
  return norm2(out);
}

void check_inputs(const DiffModel& model, const TrainedModel& trained, const Dataset& data,
                  const BVector& b) {
  model.check_params(trained.adapter);
  model.check_params(b.b);
  if (data.n() == 0) throw Error(ErrorCode::InvalidData, "solver needs a nonempty dataset");
}

}  // namespace

std::string_view method_name(SolveMethod method) {
  switch (method) {
    case SolveMethod::minibatch: return "minibatch";
    case SolveMethod::cg: return "cg";
    case SolveMethod::lissa: return "lissa";
    case SolveMethod::dense: return "dense";
  }
  return "minibatch";
}

SolveMethod method_from_name(std::string_view name) {
  if (name == "minibatch") return SolveMethod::minibatch;
  if (name == "cg") return SolveMethod::cg;
  if (name == "lissa") return SolveMethod::lissa;
  if (name == "dense") return SolveMethod::dense;
  throw Error(ErrorCode::ConfigError, fmt::format("unknown solver method '{}'", name));
}

void validate_solve_config(const SolveConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (!(cfg.lr > 0.0)) fail("solver lr must be > 0");
  if (!(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) fail("solver lr_decay must be in (0, 1]");
  if (cfg.batch_size < 1) fail("solver batch_size must be >= 1");
  if (!(cfg.grad_tol > 0.0)) fail("solver grad_tol must be > 0");
  if (cfg.check_every < 1) fail("solver check_every must be >= 1");
  if (!(cfg.damping >= 0.0)) fail("solver damping must be >= 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    fail("adam betas must be in [0, 1)");
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) fail("sgd momentum must be in [0, 1)");
  if (!(cfg.lissa_scale > 0.0)) fail("lissa scale must be > 0");
  if (cfg.lissa_repeats < 1) fail("lissa repeats must be >= 1");
}

DeltaSolveReport solve_minibatch(const DiffModel& model, const TrainedModel& trained,
                                 const Dataset& data, const BVector& b, const SolveConfig& cfg) {
  validate_solve_config(cfg);
  check_inputs(model, trained, data, b);
  const auto start = Clock::now();
  audit::PeakScope scope;

  const auto theta = trained.adapter.values();
  const auto rhs = b.b.values();
  const auto instances = data.instances();
  const std::size_t p = model.num_params();
  const std::size_t n = data.n();
  const bool adam = cfg.optimizer == StepRule::adam;

  DeltaSolveReport report;
  report.method = SolveMethod::minibatch;
  report.damping = cfg.damping;

  Reals delta(p, 0.0);
  Reals m(p, 0.0);  // adam first moment, or sgd velocity
  Reals v(adam ? p : 0, 0.0);
  Reals g(p, 0.0);
  Reals check(p, 0.0);

  auto full_check = [&](std::size_t epoch) {
    const double gn = residual_into(model, instances, theta, delta, rhs, cfg.damping, check);
    report.hvp_evals += n;
    report.trace.push_back({epoch, gn});
    report.residual_norm = gn;
    return gn;
  };
  auto snapshot = [&] {
    DeltaSolveReport last = report;
    last.delta = ParameterVector(trained.adapter.layout_ptr(), delta);
    last.wall_clock_s = seconds_since(start);
    last.peak_aux_floats = scope.peak_floats();
    return last;
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);

  double gn = full_check(0);
  report.converged = gn <= cfg.grad_tol;
  double lr = cfg.lr;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs && !report.converged; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t lo = 0; lo < n; lo += cfg.batch_size) {
      const std::size_t hi = std::min(n, lo + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + lo, hi - lo);

      // g = (1/|B|) sum_{i in B} hvp_i(delta) + damping * delta - b
      std::fill(g.begin(), g.end(), 0.0);
      accumulate_batch_hvp(model, instances, batch, theta, delta,
                           1.0 / static_cast<double>(batch.size()), g);
      report.hvp_evals += batch.size();
      axpy_into(cfg.damping, delta, g);
      axpy_into(-1.0, rhs, g);

      ++step;
      // Turn g into the update in place, so delta stays the last finite iterate.
      if (adam) {
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < p; ++i) {
          m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
          v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
          g[i] = lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
        }
      } else {
        for (std::size_t i = 0; i < p; ++i) {
          m[i] = cfg.momentum * m[i] + g[i];
          g[i] = lr * m[i];
        }
      }
      if (!all_finite(g)) {
        throw SolverError(ErrorCode::SolverDiverged,
                          fmt::format("mini-batch solver produced a non-finite step at epoch {}",
                                      epoch),
                          snapshot());
      }
      axpy_into(-1.0, g, delta);
      report.iterations = step;
    }
    lr *= cfg.lr_decay;
    if (epoch % cfg.check_every == 0 || epoch == cfg.max_epochs) {
      gn = full_check(epoch);
      if (!std::isfinite(gn)) {
        throw SolverError(ErrorCode::SolverDiverged, "mini-batch solver residual is not finite",
                          snapshot());
      }
      report.converged = gn <= cfg.grad_tol;
    }
  }

  report.delta = ParameterVector(trained.adapter.layout_ptr(), std::move(delta));
  report.peak_aux_floats = scope.peak_floats();
  report.wall_clock_s = seconds_since(start);
  return report;
}

DeltaSolveReport solve_cg(const DiffModel& model, const TrainedModel& trained, const Dataset& data,
                          const BVector& b, double damping, double tol, std::size_t max_iters) {
  check_inputs(model, trained, data, b);
  if (!(damping >= 0.0) || !(tol > 0.0)) {
    throw Error(ErrorCode::ConfigError, "cg needs damping >= 0 and tol > 0");
  }
  const auto start = Clock::now();
  audit::PeakScope scope;
  const auto theta = trained.adapter.values();
  const auto rhs = b.b.values();
  const auto instances = data.instances();
  const std::size_t p = model.num_params();
  const std::size_t n = data.n();
  if (max_iters == 0) max_iters = 2 * p;

  DeltaSolveReport report;
  report.method = SolveMethod::cg;
  report.damping = damping;

  Reals x(p, 0.0);
  Reals r(rhs.begin(), rhs.end());
  Reals dir(r);
  Reals ad(p, 0.0);
  const double bnorm = norm2(rhs);
  const double target = tol * bnorm;
  double rs = dot(r, r);
  report.converged = std::sqrt(rs) <= target;
  while (!report.converged && report.iterations < max_iters) {
    apply_damped_hessian(model, instances, theta, dir, damping, ad);
    report.hvp_evals += n;
    const double curvature = dot(dir, ad);
    if (!(curvature > 0.0)) {
      throw SolverError(ErrorCode::NotPositiveDefinite,
                        fmt::format("cg found non-positive curvature {:.3e}; raise damping",
                                    curvature),
                        std::nullopt);
    }
    const double alpha = rs / curvature;
    axpy_into(alpha, dir, x);
    axpy_into(-alpha, ad, r);
    const double rs_next = dot(r, r);
    ++report.iterations;
    report.converged = std::sqrt(rs_next) <= target;
    const double beta = rs_next / rs;
    rs = rs_next;
    for (std::size_t i = 0; i < p; ++i) dir[i] = r[i] + beta * dir[i];
  }
  report.residual_norm = residual_into(model, instances, theta, x, rhs, damping, ad);
  report.hvp_evals += n;
  report.delta = ParameterVector(trained.adapter.layout_ptr(), std::move(x));
  report.peak_aux_floats = scope.peak_floats();
  report.wall_clock_s = seconds_since(start);
  return report;
}

DeltaSolveReport solve_lissa(const DiffModel& model, const TrainedModel& trained,
                             const Dataset& data, const BVector& b, const LissaOptions& opts) {
  check_inputs(model, trained, data, b);
  if (!(opts.scale > 0.0) || opts.repeats < 1 || !(opts.damping >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "lissa needs scale > 0, repeats >= 1, damping >= 0");
  }
  const auto start = Clock::now();
  audit::PeakScope scope;
  const auto theta = trained.adapter.values();
  const auto rhs = b.b.values();
  const auto instances = data.instances();
  const std::size_t p = model.num_params();

  DeltaSolveReport report;
  report.method = SolveMethod::lissa;
  report.damping = opts.damping;

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.n() - 1);
  const double bnorm = norm2(rhs);
  Reals estimate(p, 0.0);
  Reals cur(p);
  Reals hv(p);
  for (std::size_t rep = 0; rep < opts.repeats; ++rep) {
    std::copy(rhs.begin(), rhs.end(), cur.begin());
    for (std::size_t j = 1; j <= opts.depth; ++j) {
      std::fill(hv.begin(), hv.end(), 0.0);
      model.accumulate_hvp(instances[pick(rng)], theta, cur, 1.0, hv);
      axpy_into(opts.damping, cur, hv);
      ++report.hvp_evals;
      for (std::size_t i = 0; i < p; ++i) cur[i] = rhs[i] + cur[i] - hv[i] / opts.scale;
      ++report.iterations;
      // Partial sums of a non-expansive series grow at most linearly.
      const double norm = norm2(cur);
      if (!std::isfinite(norm) || norm > 10.0 * bnorm * static_cast<double>(j + 1)) {
        throw SolverError(
            ErrorCode::SeriesDiverged,
            fmt::format("lissa iterate norm {:.3e} at depth {} exceeds the growth bound; raise "
                        "scale",
                        norm, j),
            std::nullopt);
      }
    }
    axpy_into(1.0 / opts.scale, cur, estimate);
  }
  scale_into(1.0 / static_cast<double>(opts.repeats), estimate);

  report.residual_norm = residual_into(model, instances, theta, estimate, rhs, opts.damping, hv);
  report.delta = ParameterVector(trained.adapter.layout_ptr(), std::move(estimate));
  report.converged = true;
  report.peak_aux_floats = scope.peak_floats();
  report.wall_clock_s = seconds_since(start);
  return report;
}

Reals dense_hessian(const DiffModel& model, const Dataset& data, const ParameterVector& theta) {
  model.check_params(theta);
  const std::size_t p = model.num_params();
  if (p > kDenseMaxParams) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("dense Hessian limited to p <= {}, got {}", kDenseMaxParams, p));
  }
  Reals h(p * p, 0.0);
  Reals basis(p, 0.0);
  Reals column(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    basis[k] = 1.0;
    apply_damped_hessian(model, data.instances(), theta.values(), basis, 0.0, column);
    basis[k] = 0.0;
    for (std::size_t i = 0; i < p; ++i) h[i * p + k] = column[i];
  }
  return h;
}

DeltaSolveReport solve_dense(const DiffModel& model, const TrainedModel& trained,
                             const Dataset& data, const BVector& b, double damping) {
  check_inputs(model, trained, data, b);
  const auto start = Clock::now();
  audit::PeakScope scope;
  const std::size_t p = model.num_params();

  DeltaSolveReport report;
  report.method = SolveMethod::dense;
  report.damping = damping;

  Reals h = dense_hessian(model, data, trained.adapter);
  report.hvp_evals = p * data.n();
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMajor> hm(h.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::MatrixXd a = 0.5 * (hm + hm.transpose());
  a.diagonal().array() += damping;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  const auto diag = ldlt.vectorD().cwiseAbs();
  const double dmax = p > 0 ? diag.maxCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || p == 0 || !(diag.minCoeff() > 1e-14 * dmax)) {
    throw SolverError(ErrorCode::SingularSystem, "dense system is singular; raise damping",
                      std::nullopt);
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(b.b.values().data(), static_cast<Eigen::Index>(p));
  Eigen::VectorXd x = ldlt.solve(rhs);
  // One step of iterative refinement.
  const Eigen::VectorXd r = rhs - a * x;
  x += ldlt.solve(r);
  report.iterations = 1;

  Reals delta(x.data(), x.data() + p);
  Reals work(p, 0.0);
  report.residual_norm = residual_into(model, data.instances(), trained.adapter.values(), delta,
                                       b.b.values(), damping, work);
  report.hvp_evals += data.n();
  report.converged = true;
  report.delta = ParameterVector(trained.adapter.layout_ptr(), std::move(delta));
  report.peak_aux_floats = scope.peak_floats();
  report.wall_clock_s = seconds_since(start);
  return report;
}

DeltaSolveReport solve(SolveMethod method, const DiffModel& model, const TrainedModel& trained,
                       const Dataset& data, const BVector& b, const SolveConfig& cfg) {
  switch (method) {
    case SolveMethod::minibatch: return solve_minibatch(model, trained, data, b, cfg);
    case SolveMethod::cg:
      return solve_cg(model, trained, data, b, cfg.damping, cfg.cg_tol, cfg.cg_max_iters);
    case SolveMethod::lissa:
      return solve_lissa(model, trained, data, b,
                         LissaOptions{cfg.damping, cfg.lissa_scale, cfg.lissa_depth,
                                      cfg.lissa_repeats, cfg.seed});
    case SolveMethod::dense: return solve_dense(model, trained, data, b, cfg.damping);
  }
  throw Error(ErrorCode::ConfigError, "unknown solver method");
}

double damped_residual_norm(const DiffModel& model, const Dataset& data,
                            const ParameterVector& theta, const ParameterVector& delta,
                            const ParameterVector& b, double damping) {
  model.check_params(theta);
  model.check_params(delta);
  model.check_params(b);
  Reals out(model.num_params(), 0.0);
  return residual_into(model, data.instances(), theta.values(), delta.values(), b.values(),
                       damping, out);
}

double quadratic_objective(const DiffModel& model, const Dataset& data,
                           const ParameterVector& theta, const ParameterVector& delta,
                           const ParameterVector& b, double damping) {
  Reals hd(model.num_params(), 0.0);
  apply_damped_hessian(model, data.instances(), theta.values(), delta.values(), damping, hd);
  return 0.5 * dot(delta.values(), hd) - dot(b.values(), delta.values());
}

}  // namespace unlearn
