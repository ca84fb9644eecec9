// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

// Desk-scale acceptance run. Prints one line per criterion and exits with the
// number of failures.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <new>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "unlearn/bench.hpp"
#include "unlearn/checkpoint.hpp"
#include "unlearn/digest.hpp"
#include "unlearn/eraser.hpp"
#include "unlearn/json_io.hpp"
#include "unlearn/models.hpp"
#include "unlearn/solver.hpp"

// ---- allocation hook -------------------------------------------------------

namespace {
thread_local bool g_tracking = false;
thread_local std::size_t g_largest_bytes = 0;
}  // namespace

void* operator new(std::size_t size) {
  if (g_tracking && size > g_largest_bytes) g_largest_bytes = size;
  if (void* p = std::malloc(size == 0 ? 1 : size)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

using namespace unlearn;
using Clock = std::chrono::steady_clock;

struct LargestAllocation {
  LargestAllocation() {
    g_largest_bytes = 0;
    g_tracking = true;
  }
  ~LargestAllocation() { g_tracking = false; }
  std::size_t bytes() const { return g_largest_bytes; }
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_l2(std::span<const double> a, std::span<const double> ref) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ref[i]) * (a[i] - ref[i]);
    den += ref[i] * ref[i];
  }
  return std::sqrt(num / den);
}

ParameterVector random_vector(const LayoutPtr& layout, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  auto v = ParameterVector::zeros(layout);
  for (auto& x : v.mutable_values()) x = normal(rng);
  return v;
}

Dataset zoo_data(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  const auto labels = label_spec_of(spec);
  if (const auto* net = std::get_if<LowRankAdapterNetSpec>(&spec)) {
    return teacher_dataset(*net, n, seed + 1, seed);
  }
  if (labels.kind == LabelKind::binary) return gaussian_binary(n, input_dim(spec), 1.5, seed);
  return gaussian_multiclass(n, input_dim(spec), labels.classes, 1.5, seed);
}

// ---- A1 --------------------------------------------------------------------

Outcome hvp_correctness() {
  const std::vector<ModelSpec> zoo{LogisticRegressionSpec{20, 1.0, 500},
                                   SoftmaxRegressionSpec{10, 4, 1.0, 500},
                                   LowRankAdapterNetSpec{12, 16, 3, 4, 0.1, 500, 3},
                                   LowRankAdapterNetSpec{8, 10, 2, 2, 0.1, 500, 4}};
  double worst_fd = 0.0;
  double worst_lin = 0.0;
  double worst_sym = 0.0;
  std::mt19937_64 rng(1);
  for (const auto& spec : zoo) {
    const auto model = make_model(spec);
    const auto data = zoo_data(spec, 100, 2);
    const auto layout = model->layout();
    const std::size_t p = layout->size();
    for (std::size_t t = 0; t < 100; ++t) {
      const auto& z = data[t];
      const auto theta = random_vector(layout, rng, 0.5);
      const auto v = random_vector(layout, rng, 1.0);
      const auto w = random_vector(layout, rng, 1.0);
      worst_fd = std::max(worst_fd, fd_hvp_check(*model, z, theta, v, 1e-5));

      const std::span<const Instance> one(&z, 1);
      const auto hv = batch_hvp(*model, one, theta, v);
      const auto hw = batch_hvp(*model, one, theta, w);
      const double a = 0.7;
      const double b = -1.3;
      const auto combo = batch_hvp(*model, one, theta, axpy(a, v, axpy(b, w, ParameterVector::zeros(layout))));
      Reals expected(p);
      for (std::size_t k = 0; k < p; ++k) expected[k] = a * hv[k] + b * hw[k];
      worst_lin = std::max(worst_lin, rel_l2(combo.values(), expected));

      const double vhw = dot(v.values(), hw.values());
      const double whv = dot(w.values(), hv.values());
      const double scale = std::max({std::abs(vhw), std::abs(whv), 1e-300});
      worst_sym = std::max(worst_sym, std::abs(vhw - whv) / scale);
    }
  }
  return {worst_fd <= 1e-5 && worst_lin <= 1e-10 && worst_sym <= 1e-10,
          fmt::format("fd {:.2e} <= 1e-5, linearity {:.2e} <= 1e-10, symmetry {:.2e} <= 1e-10",
                      worst_fd, worst_lin, worst_sym)};
}

// ---- the A2 problem ----------------------------------------------------------

struct SolverProblem {
  Dataset data;
  TrainedModel trained;
  std::unique_ptr<DiffModel> model;
  BVector b;
};

SolverProblem a2_problem(std::uint64_t seed) {
  auto data = gaussian_binary(500, 20, 1.5, derive_seed(seed, "data"));
  auto trained = train(LogisticRegressionSpec{20, 1.0, 0}, data, {});
  auto model = trained.model();
  const auto c = corrupt(data, {CorruptionKind::label_flip, 0.05, 1.0, 1, derive_seed(seed, "corrupt")});
  ResponseCorrection rc;
  for (auto id : c.ids) rc.edits.push_back({id, 1 - class_index(data.find(id)->label)});
  auto b = build_b(*model, trained, data, rc);
  return {std::move(data), std::move(trained), std::move(model), std::move(b)};
}

SolveConfig a2_config(std::uint64_t seed) {
  SolveConfig cfg;
  cfg.damping = 1e-3;
  cfg.seed = derive_seed(seed, "solve");
  return cfg;
}

Outcome solver_oracle() {
  const auto pr = a2_problem(0);
  const auto cfg = a2_config(0);
  const auto dense = solve_dense(*pr.model, pr.trained, pr.data, pr.b, cfg.damping);
  const auto mb = solve_minibatch(*pr.model, pr.trained, pr.data, pr.b, cfg);
  const auto cg = solve_cg(*pr.model, pr.trained, pr.data, pr.b, cfg.damping, 1e-12, 0);
  const double e_mb = rel_l2(mb.delta.values(), dense.delta.values());
  const double e_cg = rel_l2(cg.delta.values(), dense.delta.values());
  return {e_mb <= 1e-3 && e_cg <= 1e-6,
          fmt::format("minibatch {:.2e} <= 1e-3, cg {:.2e} <= 1e-6", e_mb, e_cg)};
}

// ---- experiment-based criteria -----------------------------------------------

const CellResult& cell(const ExperimentReport& r, std::uint64_t seed, const std::string& method) {
  for (const auto& c : r.cells) {
    if (c.seed == seed && c.method == method) {
      if (!c.error.empty()) throw std::runtime_error(fmt::format("{} seed {}: {}", method, seed, c.error));
      return c;
    }
  }
  throw std::runtime_error("missing cell " + method);
}

const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

Outcome unlearn_vs_retrain() {
  ExperimentConfig cfg;
  cfg.data.n_train = 1000;
  cfg.data.n_test = 1000;
  cfg.model = LogisticRegressionSpec{20, 1.0, 0};
  cfg.task = "IR";
  cfg.remove_ratio = 0.05;
  cfg.methods = {"corrupted", "eraser", "retrain"};
  cfg.seeds = kSeeds;
  const auto r = run_experiment(cfg);
  double eraser_dist = 0.0;
  double source_dist = 0.0;
  double acc_gap = 0.0;
  for (auto s : kSeeds) {
    eraser_dist += cell(r, s, "eraser").param_distance / 5.0;
    source_dist += cell(r, s, "corrupted").param_distance / 5.0;
    acc_gap += std::abs(cell(r, s, "eraser").metrics.accuracy -
                        cell(r, s, "retrain").metrics.accuracy) * 100.0 / 5.0;
  }
  return {eraser_dist <= 0.1 * source_dist && acc_gap <= 0.5,
          fmt::format("mean distance {:.3e} <= 0.1 * {:.3e}, mean accuracy gap {:.3f} <= 0.5 pt",
                      eraser_dist, source_dist, acc_gap)};
}

ExperimentConfig a4_config() {
  ExperimentConfig cfg;
  cfg.data.n_train = 2000;
  cfg.data.n_test = 2000;
  cfg.model = LogisticRegressionSpec{20, 1.0, 0};
  cfg.corruption = CorruptionSpec{CorruptionKind::label_flip, 0.4, 1.0, 1, 0};
  cfg.task = "truth";
  cfg.methods = {"corrupted", "eraser", "retrain"};
  cfg.seeds = kSeeds;
  return cfg;
}

std::optional<ExperimentReport> g_a4;

const ExperimentReport& a4_report() {
  if (!g_a4) g_a4 = run_experiment(a4_config());
  return *g_a4;
}

Outcome corruption_recovery() {
  const auto& r = a4_report();
  bool ok = true;
  std::string detail;
  for (auto s : kSeeds) {
    const double corrupted = 100.0 * cell(r, s, "corrupted").metrics.accuracy;
    const double eraser = 100.0 * cell(r, s, "eraser").metrics.accuracy;
    const double retrain = 100.0 * cell(r, s, "retrain").metrics.accuracy;
    const bool seed_ok = corrupted <= retrain - 5.0 && std::abs(eraser - retrain) <= 2.0 &&
                         corrupted < eraser && eraser <= retrain;
    ok = ok && seed_ok;
    detail += fmt::format("{}seed {}: {:.2f} < {:.2f} <= {:.2f}{}", detail.empty() ? "" : "; ", s,
                          corrupted, eraser, retrain, seed_ok ? "" : " (fails)");
  }
  return {ok, detail};
}

Outcome query_recovery() {
  bool ok = true;
  std::string detail;
  const auto run = [&](const std::string& label, ExperimentConfig cfg, double tolerance) {
    cfg.corruption = CorruptionSpec{CorruptionKind::feature_noise, 0.1, 5.0, 1, 0};
    cfg.task = "truth";
    cfg.methods = {"corrupted", "eraser", "retrain"};
    cfg.seeds = kSeeds;
    const auto r = run_experiment(cfg);
    std::size_t good = 0;
    double worst_gap = 0.0;
    double min_gain = INFINITY;
    for (auto s : kSeeds) {
      // AUC, the metric of the binary rating task this mirrors.
      const double corrupted = 100.0 * cell(r, s, "corrupted").metrics.auc.value();
      const double eraser = 100.0 * cell(r, s, "eraser").metrics.auc.value();
      const double retrain = 100.0 * cell(r, s, "retrain").metrics.auc.value();
      worst_gap = std::max(worst_gap, std::abs(eraser - retrain));
      min_gain = std::min(min_gain, eraser - corrupted);
      good += eraser > corrupted && std::abs(eraser - retrain) <= tolerance;
    }
    ok = ok && good == kSeeds.size();
    detail += fmt::format("{}{}: {}/5 seeds, min AUC gain {:.3f} pt, worst gap {:.3f} <= {} pt",
                          detail.empty() ? "" : "; ", label, good, min_gain, worst_gap, tolerance);
  };

  ExperimentConfig logistic;
  logistic.data.n_train = 2000;
  logistic.data.n_test = 2000;
  logistic.model = LogisticRegressionSpec{20, 1.0, 0};
  run("logistic", logistic, 2.0);

  ExperimentConfig net;
  net.data.generator = "teacher";
  net.data.n_train = 2000;
  net.data.n_test = 2000;
  net.model = LowRankAdapterNetSpec{10, 16, 2, 2, 100.0, 0, 7};
  net.solve.damping = 1e-2;
  run("adapter_net", net, 3.0);
  return {ok, detail};
}

// Largest eigenvalue over single-instance damped Hessians, by power iteration.
double lissa_scale(const SolverProblem& pr, double damping) {
  double largest = 0.0;
  const auto layout = pr.model->layout();
  std::mt19937_64 rng(5);
  for (const auto& z : pr.data.instances()) {
    auto v = random_vector(layout, rng, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 30; ++it) {
      auto hv = batch_hvp(*pr.model, std::span<const Instance>(&z, 1), pr.trained.adapter, v);
      const double norm = norm2(hv.values());
      lambda = norm / norm2(v.values());
      if (norm == 0.0) break;
      for (std::size_t k = 0; k < v.size(); ++k) v.mutable_values()[k] = hv[k] / norm;
    }
    largest = std::max(largest, lambda);
  }
  return largest + damping;
}

Outcome cumulative_error() {
  std::size_t wins = 0;
  std::string detail;
  for (auto s : kSeeds) {
    const auto pr = a2_problem(s);
    const auto cfg = a2_config(s);
    const auto mb = solve_minibatch(*pr.model, pr.trained, pr.data, pr.b, cfg);
    LissaOptions opts;
    opts.damping = cfg.damping;
    opts.scale = lissa_scale(pr, cfg.damping);
    opts.depth = mb.hvp_evals;
    opts.repeats = 1;
    opts.seed = cfg.seed;
    const auto lissa = solve_lissa(*pr.model, pr.trained, pr.data, pr.b, opts);
    wins += lissa.residual_norm >= mb.residual_norm;
    detail += fmt::format("{}seed {}: lissa {:.2e} vs minibatch {:.2e} at {} hvps",
                          detail.empty() ? "" : "; ", s, lissa.residual_norm, mb.residual_norm,
                          mb.hvp_evals);
  }
  return {wins >= 4, fmt::format("{}/5 seeds; {}", wins, detail)};
}

Outcome efficiency() {
  const auto& r = a4_report();
  double eraser = 0.0;
  double retrain = 0.0;
  for (auto s : kSeeds) {
    eraser += cell(r, s, "eraser").seconds;
    retrain += cell(r, s, "retrain").seconds;
  }
  return {eraser <= retrain / 2.0,
          fmt::format("eraser {:.3f} s, retrain {:.3f} s, speedup {:.1f}x (needs >= 2x)", eraser,
                      retrain, retrain / eraser)};
}

Outcome memory() {
  bool ok = true;
  std::string detail;
  for (std::size_t p : {50u, 500u, 5000u}) {
    const std::size_t d = p - 1;
    // Small n keeps dataset-sized copies well below p^2 doubles at p = 50.
    const std::size_t n = p == 50 ? 200 : p == 500 ? 400 : 100;
    const auto data = gaussian_binary(n, d, 1.5, p);
    TrainConfig tc;
    tc.max_epochs = 200;
    const auto trained = train(LogisticRegressionSpec{d, 1.0, 0}, data, tc);
    std::vector<InstanceId> ids{0, 1, 2, 3, 4};
    EraserOptions opts;
    opts.force = true;
    opts.solve.max_epochs = 20;
    const auto model = trained.model();
    const auto b = build_b(*model, trained, data, InstanceRemoval{ids}, true);
    std::size_t peak = 0;
    std::size_t largest = 0;
    {
      LargestAllocation hook;
      const auto report = solve_minibatch(*model, trained, data, b, opts.solve);
      peak = report.peak_aux_floats;
      const auto outcome = unlearn::unlearn(trained, data, InstanceRemoval{ids}, opts);
      peak = std::max(peak, outcome.solve_report.peak_aux_floats);
      largest = hook.bytes();
    }
    const bool p_ok = peak <= 8 * p && largest < p * p * sizeof(double);
    ok = ok && p_ok;
    detail += fmt::format("p={}: peak {} <= {} floats, largest block {} B < {} B; ", p, peak,
                          8 * p, largest, p * p * sizeof(double));
  }
  // Control: the dense oracle is the one place a p x p buffer appears.
  {
    const std::size_t p = 50;
    const auto data = gaussian_binary(200, p - 1, 1.5, 9);
    const auto trained = train(LogisticRegressionSpec{p - 1, 1.0, 0}, data, {});
    const auto model = trained.model();
    const auto b = build_b(*model, trained, data, InstanceRemoval{{1}});
    LargestAllocation hook;
    solve_dense(*model, trained, data, b, 1e-3);
    const bool seen = hook.bytes() >= p * p * sizeof(double);
    ok = ok && seen;
    detail += fmt::format("dense control allocates {} B >= {} B", hook.bytes(), p * p * sizeof(double));
  }
  return {ok, detail};
}

Outcome convergence_trend() {
  bool ok = true;
  std::string detail;
  for (auto s : kSeeds) {
    const auto pr = a2_problem(s);
    auto cfg = a2_config(s);
    cfg.grad_tol = 1e-300;  // run the full budget
    const auto r = solve_minibatch(*pr.model, pr.trained, pr.data, pr.b, cfg);
    double at50 = NAN;
    double at200 = NAN;
    for (const auto& c : r.trace) {
      if (c.epoch == 50) at50 = c.grad_norm;
      if (c.epoch == 200) at200 = c.grad_norm;
    }
    const bool seed_ok = at200 <= 0.5 * at50;
    ok = ok && seed_ok;
    detail += fmt::format("{}seed {}: {:.3f}", detail.empty() ? "" : "; ", s, at200 / at50);
  }
  return {ok, "ratio epoch200/epoch50 <= 0.5: " + detail};
}

// ---- A10 -----------------------------------------------------------------------

Outcome invariants() {
  std::vector<std::string> failed;
  const auto expect = [&](bool cond, const char* what) {
    if (!cond) failed.emplace_back(what);
  };

  const auto v = flatten({{"w", {2, 2}, {1, 2, 3, 4}}, {"b", {2}, {5, 6}}});
  expect(std::vector<double>(v.values().begin(), v.values().end()) ==
             std::vector<double>{1, 2, 3, 4, 5, 6},
         "flatten");
  expect(unflatten(v)[1].values == std::vector<double>{5, 6}, "unflatten");
  const auto layout = Layout::make({{"x", {3}}});
  const ParameterVector a(layout, Reals{1, 2, 3});
  const ParameterVector b(layout, Reals{10, 20, 30});
  const auto c = axpy(2.0, a, b);
  expect(c[0] == 12 && c[1] == 24 && c[2] == 36, "axpy");

  const auto data = gaussian_binary(300, 4, 1.5, 3);
  const auto trained = train(LogisticRegressionSpec{4, 1.0, 0}, data, {});
  EraserOptions opts;
  opts.solve.max_epochs = 40;
  const auto empty = unlearn::unlearn(trained, data, InstanceRemoval{}, opts);
  expect(std::equal(empty.new_model.adapter.values().begin(), empty.new_model.adapter.values().end(),
                    trained.adapter.values().begin()),
         "empty request is identity");

  const auto first = unlearn::unlearn(trained, data, InstanceRemoval{{5, 9, 2}}, opts);
  const auto second = unlearn::unlearn(trained, data, InstanceRemoval{{2, 5, 9}}, opts);
  expect(outcome_digest(first) == outcome_digest(second), "unlearn digest");
  for (std::size_t k = 0; k < trained.adapter.size(); ++k) {
    if (first.new_model.adapter[k] - trained.adapter[k] != first.solve_report.delta[k]) {
      failed.emplace_back("delta equals new - old");
      break;
    }
  }
  expect(model_digest(train(LogisticRegressionSpec{4, 1.0, 0}, data, {})) == model_digest(trained),
         "train digest");

  ExperimentConfig ecfg;
  ecfg.data.n_train = 200;
  ecfg.data.n_test = 200;
  ecfg.model = LogisticRegressionSpec{4, 1.0, 0};
  ecfg.corruption = CorruptionSpec{CorruptionKind::label_flip, 0.2, 1.0, 1, 0};
  ecfg.solve.max_epochs = 30;
  ecfg.seeds = {3, 3};
  const auto r1 = run_experiment(ecfg);
  const auto r2 = run_experiment(ecfg);
  expect(sha256_hex(dump_json(report_to_json(r1))) == sha256_hex(dump_json(report_to_json(r2))),
         "experiment digest");
  expect(r1.cells[0].param_distance == r1.cells[3].param_distance, "repeated seed");

  const auto corruption = corrupt(data, {CorruptionKind::label_flip, 0.1, 1.0, 1, 4});
  const auto restored = apply_request(corruption.corrupted, corruption.truth);
  bool same = true;
  for (std::size_t i = 0; i < data.n(); ++i) same = same && restored[i] == data[i];
  expect(same, "corruption truth restores the data");

  const std::vector<int> truth{0, 0, 1, 1};
  expect(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, truth) == 1.0, "auc");

  std::string detail = "flatten, axpy, identity request, delta exactness, digests, corruption inverse, auc";
  if (!failed.empty()) {
    detail = "failed:";
    for (const auto& f : failed) detail += " " + f + ";";
  }
  return {failed.empty(), detail + " (module property suites run under ctest)"};
}

struct Criterion {
  const char* id;
  double budget_s;  // 0 means no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"A1", 10.0, hvp_correctness},       {"A2", 60.0, solver_oracle},
      {"A3", 120.0, unlearn_vs_retrain},   {"A4", 180.0, corruption_recovery},
      {"A5", 300.0, query_recovery},       {"A6", 120.0, cumulative_error},
      {"A7", 0.0, efficiency},             {"A8", 0.0, memory},
      {"A9", 0.0, convergence_trend},      {"A10", 0.0, invariants}};
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    const double secs = seconds_since(start);
    std::string timing = fmt::format("{:.1f} s", secs);
    if (c.budget_s > 0.0) {
      timing += fmt::format(" <= {:.0f} s", c.budget_s);
      if (secs > c.budget_s) {
        o.pass = false;
        timing += " (over budget)";
      }
    }
    failures += !o.pass;
    fmt::print("{:<4} {}  {}  [{}]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail, timing);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
