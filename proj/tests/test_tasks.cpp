// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "unlearn/bench.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/json_io.hpp"
#include "unlearn/tasks.hpp"

using namespace unlearn;
using namespace unlearn::testing;

namespace {

struct Fixture {
  Dataset data = gaussian_binary(10, 3, 1.0, 77);
  TrainedModel trained = train(LogisticRegressionSpec{3, 1.0, 0}, data, {});
  std::unique_ptr<DiffModel> model = trained.model();
};

// Straight-line logistic gradient at theta = (w, b) including the L2 share.
std::vector<double> logistic_grad(std::span<const double> theta, std::span<const double> x, int y,
                                  double l2_share) {
  double s = theta[x.size()];
  for (std::size_t k = 0; k < x.size(); ++k) s += theta[k] * x[k];
  const double r = 1.0 / (1.0 + std::exp(-s)) - y;
  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < x.size(); ++k) g[k] = r * x[k] + l2_share * theta[k];
  g[x.size()] = r + l2_share * theta[x.size()];
  return g;
}

bool all_zero(const ParameterVector& v) {
  for (double x : v.values()) {
    if (x != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("empty requests give b = 0") {
  Fixture f;
  REQUIRE(f.trained.converged);
  CHECK(all_zero(build_b(*f.model, f.trained, f.data, InstanceRemoval{}).b));
  CHECK(all_zero(build_b(*f.model, f.trained, f.data, QueryModification{}).b));
  CHECK(all_zero(build_b(*f.model, f.trained, f.data, ResponseCorrection{}).b));
}

TEST_CASE("IR of one instance with n = 10 gives 0.1 grad") {
  Fixture f;
  const auto b = build_b(*f.model, f.trained, f.data, InstanceRemoval{{4}});
  const auto g = f.model->grad(f.data[4], f.trained.adapter);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(b.b[k] == 0.1 * g[k]);
  CHECK(b.task == TaskKind::IR);
  CHECK(b.n == 10);
}

TEST_CASE("RC to the same label gives b = 0") {
  Fixture f;
  ResponseCorrection rc{{{2, f.data[2].label}, {7, f.data[7].label}}};
  CHECK(all_zero(build_b(*f.model, f.trained, f.data, rc).b));
}

TEST_CASE("QM single edit matches a straight-line oracle") {
  Fixture f;
  const std::vector<double> edited{0.5, -2.0, 1.25};
  const auto b = build_b(*f.model, f.trained, f.data, QueryModification{{{3, edited}}});
  const auto& z = f.data[3];
  const int y = class_index(z.label);
  const double share = 1.0 / 10.0;
  const auto g = logistic_grad(f.trained.adapter.values(), z.features, y, share);
  const auto g2 = logistic_grad(f.trained.adapter.values(), edited, y, share);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(b.b[k] == doctest::Approx(0.1 * (g[k] - g2[k])).epsilon(1e-12));
  }
}

TEST_CASE("request validation") {
  Fixture f;
  CHECK(code_of([&] { validate_request(InstanceRemoval{{99}}, f.data); }) ==
        ErrorCode::UnknownInstance);
  CHECK(code_of([&] { validate_request(InstanceRemoval{{1, 1}}, f.data); }) ==
        ErrorCode::EditInvalid);
  CHECK(code_of([&] { validate_request(QueryModification{{{1, {1.0}}}}, f.data); }) ==
        ErrorCode::EditInvalid);
  CHECK(code_of([&] { validate_request(ResponseCorrection{{{1, 0.5}}}, f.data); }) ==
        ErrorCode::EditInvalid);
  CHECK(code_of([&] { validate_request(ResponseCorrection{{{1, 2}}}, f.data); }) ==
        ErrorCode::EditInvalid);
  InstanceRemoval everything;
  for (const auto& z : f.data.instances()) everything.target_ids.push_back(z.id);
  CHECK(code_of([&] { validate_request(everything, f.data); }) == ErrorCode::RequestTooLarge);
  everything.target_ids.pop_back();
  CHECK_NOTHROW(validate_request(everything, f.data));
}

TEST_CASE("build_b refuses unconverged sources unless forced") {
  Fixture f;
  auto loose = f.trained;
  loose.converged = false;
  CHECK(code_of([&] { build_b(*f.model, loose, f.data, InstanceRemoval{{1}}); }) ==
        ErrorCode::NotAtOptimum);
  CHECK_NOTHROW(build_b(*f.model, loose, f.data, InstanceRemoval{{1}}, true));
}

TEST_CASE("b is additive over partitions of a request") {
  Fixture f;
  const auto whole = build_b(*f.model, f.trained, f.data, InstanceRemoval{{0, 3, 5, 8}}).b;
  const auto left = build_b(*f.model, f.trained, f.data, InstanceRemoval{{5, 0}}).b;
  const auto right = build_b(*f.model, f.trained, f.data, InstanceRemoval{{8, 3}}).b;
  CHECK(max_abs_diff(whole.values(), axpy(1.0, left, right).values()) <= 1e-15);

  ResponseCorrection rc;
  for (InstanceId id : {1u, 2u, 6u}) rc.edits.push_back({id, 1 - class_index(f.data[id].label)});
  const auto all = build_b(*f.model, f.trained, f.data, rc).b;
  auto sum = ParameterVector::zeros(all.layout_ptr());
  for (const auto& e : rc.edits) {
    sum = axpy(1.0, build_b(*f.model, f.trained, f.data, ResponseCorrection{{e}}).b, sum);
  }
  CHECK(max_abs_diff(all.values(), sum.values()) <= 1e-15);
}

TEST_CASE("RC flip equals removing the original minus adding the flipped instance") {
  Fixture f;
  const auto& z = f.data[6];
  Instance flipped = z;
  flipped.label = 1 - class_index(z.label);
  const auto rc = build_b(*f.model, f.trained, f.data, ResponseCorrection{{{6, flipped.label}}}).b;
  const auto ir = build_b(*f.model, f.trained, f.data, InstanceRemoval{{6}}).b;
  const auto g_flip = f.model->grad(flipped, f.trained.adapter);
  const auto oracle = axpy(-0.1, g_flip, ir);
  CHECK(max_abs_diff(rc.values(), oracle.values()) <= 1e-15);
}

TEST_CASE("identical instances contribute identically") {
  auto base = gaussian_binary(9, 3, 1.0, 5);
  std::vector<Instance> instances(base.instances().begin(), base.instances().end());
  instances.push_back(Instance{100, instances[2].features, instances[2].label});
  const auto data = base.with_instances(instances);
  const auto trained = train(LogisticRegressionSpec{3, 1.0, 0}, data, {});
  const auto model = trained.model();
  const auto a = build_b(*model, trained, data, InstanceRemoval{{2}}).b;
  const auto b = build_b(*model, trained, data, InstanceRemoval{{100}}).b;
  CHECK(bit_equal(a.values(), b.values()));
}

TEST_CASE("apply_request keeps ids stable") {
  Fixture f;
  const auto removed = apply_request(f.data, InstanceRemoval{{3, 0}});
  CHECK(removed.n() == 8);
  CHECK_FALSE(removed.index_of(3).has_value());
  CHECK(removed.find(4)->features == f.data[4].features);

  const auto edited = apply_request(f.data, QueryModification{{{5, {1.0, 2.0, 3.0}}}});
  CHECK(edited.n() == 10);
  CHECK(edited.find(5)->features == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(edited.find(5)->label == f.data[5].label);

  const auto relabeled = apply_request(f.data, ResponseCorrection{{{5, 1 - class_index(f.data[5].label)}}});
  CHECK(relabeled.find(5)->features == f.data[5].features);
  CHECK(relabeled.find(5)->label != f.data[5].label);
}

TEST_CASE("request JSON round-trip and canonical order") {
  const UnlearnRequest ir = InstanceRemoval{{9, 2, 5}};
  CHECK(request_ids(ir) == std::vector<InstanceId>{2, 5, 9});
  CHECK(std::get<InstanceRemoval>(canonicalize(ir)).target_ids == std::vector<InstanceId>{2, 5, 9});
  for (const UnlearnRequest& req :
       {ir, UnlearnRequest{QueryModification{{{4, {0.1, 0.2}}, {1, {3.0, -1.0}}}}},
        UnlearnRequest{ResponseCorrection{{{7, 1}, {3, 0}}}},
        UnlearnRequest{ResponseCorrection{{{7, 2.5}}}}}) {
    const auto text = dump_json(request_to_json(req));
    CHECK(request_from_json(json::parse(text)) == req);
  }
  const auto im = request_from_json(json{{"task", "IM"}, {"targets", json::array()}});
  CHECK(task_of(im) == TaskKind::QM);
  CHECK(code_of([] { request_from_json(json{{"task", "XX"}, {"targets", json::array()}}); }) ==
        ErrorCode::ConfigError);
}
