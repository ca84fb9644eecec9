// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/eraser.hpp"

#include <cmath>

#include <fmt/format.h>

#include "unlearn/checkpoint.hpp"
#include "unlearn/digest.hpp"
#include "unlearn/errors.hpp"

namespace unlearn {

UnlearnOutcome unlearn(const TrainedModel& trained, const Dataset& data,
                       const UnlearnRequest& req, const EraserOptions& opts) {
  validate_request(req, data);
  const auto n = static_cast<double>(data.n());
  const auto touched = static_cast<double>(request_size(req));

  UnlearnOutcome out;
  if (touched > opts.max_fraction * n) {
    throw Error(ErrorCode::RequestTooLarge,
                fmt::format("request touches {} of {} instances, above the {} limit",
                            request_size(req), data.n(), opts.max_fraction));
  }
  if (touched > opts.warn_fraction * n) {
    out.warnings.push_back(fmt::format(
        "request touches {:.1f}% of the data; the first-order approximation may be loose",
        100.0 * touched / n));
  }

  const auto model = trained.model();
  const auto b = build_b(*model, trained, data, req, opts.force);
  out.solve_report = solve(opts.method, *model, trained, data, b, opts.solve);

  const auto& old_values = trained.adapter.values();
  const auto& step = out.solve_report.delta.values();
  Reals next(old_values.size());
  Reals applied(old_values.size());
  for (std::size_t i = 0; i < next.size(); ++i) {
    // A zero step keeps the old bits, including the sign of zero.
    next[i] = step[i] == 0.0 ? old_values[i] : old_values[i] + step[i];
    applied[i] = next[i] - old_values[i];
  }
  out.solve_report.delta = ParameterVector(trained.adapter.layout_ptr(), std::move(applied));

  out.new_model.spec = trained.spec;
  out.new_model.frozen_base = trained.frozen_base;
  out.new_model.adapter = ParameterVector(trained.adapter.layout_ptr(), std::move(next));
  out.new_model.train_config = trained.train_config;
  out.new_model.epochs = trained.epochs;

  const auto edited = apply_request(data, req);
  out.new_model.final_grad_norm = risk_grad_norm(*model, edited, out.new_model.adapter);
  out.new_model.converged = out.new_model.final_grad_norm <= trained.train_config.tol;

  out.request_digest = request_digest(req);
  out.lineage = model_digest(trained);
  return out;
}

ParameterVector upweight_delta(const TrainedModel& trained, const Dataset& data,
                               const Instance& z, double eps, const EraserOptions& opts) {
  const auto n = static_cast<double>(data.n());
  if (!(std::abs(eps) <= 10.0 / n)) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("|eps| = {} exceeds 10/n = {}", std::abs(eps), 10.0 / n));
  }
  const auto model = trained.model();
  model->check_instance(z);
  if (!trained.converged && !opts.force) {
    throw Error(ErrorCode::NotAtOptimum,
                fmt::format("source model is not converged (grad norm {})",
                            trained.final_grad_norm));
  }

  auto g = ParameterVector::zeros(trained.adapter.layout_ptr());
  model->accumulate_grad(z, trained.adapter.values(), 1.0, g.mutable_values());
  auto rhs = ParameterVector::zeros(trained.adapter.layout_ptr());
  axpy_into(-eps, g.values(), rhs.mutable_values());

  BVector b{std::move(rhs), TaskKind::IR, data.n()};
  return solve(opts.method, *model, trained, data, b, opts.solve).delta;
}

std::string request_digest(const UnlearnRequest& req) {
  return sha256_hex(dump_json(request_to_json(canonicalize(req)), -1));
}

json outcome_to_json(const UnlearnOutcome& outcome, const std::string& manifest_digest) {
  json out{{"format_version", kFormatVersion},
           {"lineage", outcome.lineage},
           {"request_digest", outcome.request_digest},
           {"solve_report", solve_report_to_json(outcome.solve_report)},
           {"checkpoint", checkpoint_to_json(outcome.new_model, manifest_digest)},
           {"warnings", outcome.warnings}};
  if (!manifest_digest.empty()) out["manifest_digest"] = manifest_digest;
  return out;
}

std::string outcome_digest(const UnlearnOutcome& outcome) {
  return sha256_hex(dump_json(outcome_to_json(outcome), -1));
}

}  // namespace unlearn
