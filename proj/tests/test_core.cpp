// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <bit>
#include <limits>
#include <random>

#include "support.hpp"
#include "unlearn/checkpoint.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/json_io.hpp"
#include "unlearn/models.hpp"
#include "unlearn/parameter_vector.hpp"

using namespace unlearn;
using unlearn::testing::bit_equal;

using unlearn::testing::code_of;

TEST_CASE("flatten concatenates segments and records offsets") {
  const auto v = flatten({{"w", {2}, {1.0, 2.0}}, {"b", {1}, {3.0}}});
  CHECK(std::vector<double>(v.values().begin(), v.values().end()) ==
        std::vector<double>{1.0, 2.0, 3.0});
  const auto& segs = v.layout().segments();
  REQUIRE(segs.size() == 2);
  CHECK(segs[0] == Segment{"w", 0, {2}});
  CHECK(segs[1] == Segment{"b", 2, {1}});
}

TEST_CASE("flatten of one segment is the identity on values") {
  const std::vector<double> values{0.5, -1.25, 3.0, 7.0};
  const auto v = flatten({{"theta", {4}, values}});
  CHECK(bit_equal(v.values(), values));
}

TEST_CASE("flatten rejects duplicate names, empty input and shape mismatches") {
  CHECK(code_of([] { flatten({{"w", {1}, {1.0}}, {"w", {1}, {2.0}}}); }) ==
        ErrorCode::NameCollision);
  CHECK(code_of([] { flatten({}); }) == ErrorCode::LayoutMismatch);
  CHECK(code_of([] { flatten({{"w", {3}, {1.0}}}); }) == ErrorCode::LayoutMismatch);
}

TEST_CASE("unflatten inverts flatten over random layouts") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> count(1, 5), dims(1, 3), extent(1, 4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<NamedArray> arrays;
    const int k = count(rng);
    for (int s = 0; s < k; ++s) {
      Shape shape;
      const int rank = dims(rng);
      for (int r = 0; r < rank; ++r) shape.push_back(static_cast<std::size_t>(extent(rng)));
      std::vector<double> values(shape_size(shape));
      for (auto& x : values) x = normal(rng);
      arrays.push_back({"seg" + std::to_string(s), shape, values});
    }
    const auto flat = flatten(arrays);
    CHECK(unflatten(flat) == arrays);
    // Segments tile [0, p) in order.
    std::size_t offset = 0;
    for (const auto& seg : flat.layout().segments()) {
      CHECK(seg.offset == offset);
      offset += seg.size();
    }
    CHECK(offset == flat.size());
  }
}

TEST_CASE("layout from explicit segments must be contiguous") {
  CHECK_NOTHROW(Layout::from_segments({{"a", 0, {2}}, {"b", 2, {3}}}));
  CHECK(code_of([] { Layout::from_segments({{"a", 0, {2}}, {"b", 3, {3}}}); }) ==
        ErrorCode::LayoutMismatch);
  CHECK(code_of([] { Layout::from_segments({{"a", 0, {2}}, {"a", 2, {3}}}); }) ==
        ErrorCode::NameCollision);
}

TEST_CASE("axpy examples") {
  const auto layout = Layout::make({{"w", {3}}});
  const ParameterVector x(layout, Reals{1.5, -2.0, 0.25});
  const ParameterVector y(layout, Reals{-0.0, 4.0, 1e-300});

  SUBCASE("a = 0 leaves y unchanged") { CHECK(bit_equal(axpy(0.0, x, y).values(), y.values())); }
  SUBCASE("a = 1, y = 0 gives x") {
    CHECK(bit_equal(axpy(1.0, x, ParameterVector::zeros(layout)).values(), x.values()));
  }
  SUBCASE("a = -1, x = y gives zero") {
    const auto zero = axpy(-1.0, x, x);
    for (double v : zero.values()) CHECK(v == 0.0);
  }
  SUBCASE("layout mismatch") {
    const ParameterVector other(Layout::make({{"v", {3}}}), Reals{1, 2, 3});
    CHECK(code_of([&] { axpy(1.0, x, other); }) == ErrorCode::LayoutMismatch);
  }
}

TEST_CASE("parameter arithmetic is bit-reproducible") {
  const auto layout = Layout::make({{"w", {50}}});
  const auto x = testing::random_vector(layout, 1);
  const auto y = testing::random_vector(layout, 2);
  const auto a = axpy(0.3, x, y);
  const auto b = axpy(0.3, x, y);
  CHECK(bit_equal(a.values(), b.values()));
  CHECK(dot(x.values(), y.values()) == dot(x.values(), y.values()));
}

TEST_CASE("dataset invariants") {
  const LabelSpec binary{LabelKind::binary, 2};
  CHECK_NOTHROW(Dataset(2, binary, {{0, {1.0, 2.0}, 1}, {5, {0.0, 0.0}, 0}}));
  CHECK(code_of([&] { Dataset(2, binary, {}); }) == ErrorCode::InvalidData);
  CHECK(code_of([&] { Dataset(2, binary, {{0, {1.0}, 1}}); }) == ErrorCode::InvalidData);
  CHECK(code_of([&] { Dataset(2, binary, {{0, {1.0, 2.0}, 2}}); }) == ErrorCode::InvalidData);
  CHECK(code_of([&] { Dataset(2, binary, {{0, {1.0, 2.0}, 0.5}}); }) == ErrorCode::InvalidData);
  CHECK(code_of([&] { Dataset(2, binary, {{3, {1.0, 2.0}, 1}, {3, {0.0, 1.0}, 0}}); }) ==
        ErrorCode::InvalidData);
  const Dataset multi(1, {LabelKind::multiclass, 3}, {{9, {1.0}, 2}});
  CHECK(multi.index_of(9) == 0u);
  CHECK_FALSE(multi.index_of(1).has_value());
  CHECK(code_of([] { Dataset(1, {LabelKind::multiclass, 3}, {{0, {1.0}, 3}}); }) ==
        ErrorCode::InvalidData);
  CHECK_NOTHROW(Dataset(1, {LabelKind::real, 0}, {{0, {1.0}, -2.5}}));
}

TEST_CASE("json numbers round-trip exactly") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> bits;
  json values = json::array();
  std::vector<double> originals;
  while (originals.size() < 1000) {
    const double d = std::bit_cast<double>(bits(rng));
    if (!std::isfinite(d)) continue;
    originals.push_back(d);
    values.push_back(d);
  }
  for (double d : {0.1, 1.0 / 3.0, -0.0, 5e-324, std::numeric_limits<double>::max()}) {
    originals.push_back(d);
    values.push_back(d);
  }
  const auto parsed = json::parse(dump_json(values));
  std::vector<double> back;
  for (const auto& v : parsed) back.push_back(v.get<double>());
  CHECK(bit_equal(back, originals));
  CHECK(dump_json(json(1.0), -1) == "1.0000000000000000e+00");
  CHECK(dump_json(json(std::numeric_limits<double>::quiet_NaN()), -1) == "null");
}

TEST_CASE("checkpoint round-trips and is byte-stable") {
  for (const ModelSpec& spec : std::vector<ModelSpec>{LogisticRegressionSpec{3, 1.0, 10},
                                                      SoftmaxRegressionSpec{2, 3, 0.5, 7},
                                                      LowRankAdapterNetSpec{4, 5, 3, 2, 0.1, 9, 42}}) {
    TrainedModel t;
    t.spec = spec;
    t.frozen_base = make_backbone(spec);
    t.adapter = initial_parameters(spec, 11);
    t.train_config = default_train_config(spec);
    t.converged = true;
    t.final_grad_norm = 3.3e-9;
    const auto text = dump_json(checkpoint_to_json(t, "abc"));
    const auto back = checkpoint_from_json(json::parse(text));
    CHECK(back.spec == t.spec);
    CHECK(bit_equal(back.adapter.values(), t.adapter.values()));
    CHECK(bit_equal(back.frozen_base.values(), t.frozen_base.values()));
    CHECK(back.train_config == t.train_config);
    CHECK(back.converged);
    CHECK(back.final_grad_norm == t.final_grad_norm);
    CHECK(dump_json(checkpoint_to_json(back, "abc")) == text);

    auto j = json::parse(text);
    CHECK(j.at("format_version") == 1);
    j["typo"] = 1;
    CHECK(code_of([&] { checkpoint_from_json(j); }) == ErrorCode::ConfigError);
    j.erase("typo");
    j["adapter"].erase(0);
    CHECK(code_of([&] { checkpoint_from_json(j); }) == ErrorCode::LayoutMismatch);
  }
}

TEST_CASE("strict config keys") {
  const json spec{{"kind", "logistic"}, {"d", 3}, {"l2", 1.0}, {"lr", 0.1}};
  CHECK(code_of([&] { model_spec_from_json(spec); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { solve_config_from_json(json{{"batchsize", 3}}); }) == ErrorCode::ConfigError);
  CHECK(solve_config_from_json(json{{"lr", 0.5}}).lr == 0.5);
}
