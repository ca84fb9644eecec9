// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "unlearn/errors.hpp"

namespace unlearn {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// In-place softmax; returns log-sum-exp of the input.
double softmax_inplace(std::span<double> o) {
  const double m = *std::max_element(o.begin(), o.end());
  double s = 0.0;
  for (auto& v : o) {
    v = std::exp(v - m);
    s += v;
  }
  for (auto& v : o) v /= s;
  return m + std::log(s);
}

LabelSpec classes_label_spec(int classes) {
  if (classes == 2) return LabelSpec{LabelKind::binary, 2};
  return LabelSpec{LabelKind::multiclass, classes};
}

void add_l2(double coeff, std::span<const double> theta, double weight, std::span<double> out) {
  if (coeff != 0.0) axpy_into(weight * coeff, theta, out);
}

double l2_loss(double coeff, std::span<const double> theta) {
  return coeff == 0.0 ? 0.0 : 0.5 * coeff * dot(theta, theta);
}

class LogisticModel final : public DiffModel {
 public:
  explicit LogisticModel(const LogisticRegressionSpec& spec)
      : d_(spec.d),
        reg_(per_instance_l2(spec)),
        layout_(Layout::make({{"w", {spec.d}}, {"b", {1}}})) {}

  const LayoutPtr& layout() const override { return layout_; }
  std::size_t input_dim() const override { return d_; }
  LabelSpec label_spec() const override { return {LabelKind::binary, 2}; }

  double loss(const Instance& z, std::span<const double> theta) const override {
    const double s = score(z.features, theta);
    return softplus(s) - class_index(z.label) * s + l2_loss(reg_, theta);
  }

  void accumulate_grad(const Instance& z, std::span<const double> theta, double weight,
                       std::span<double> out) const override {
    const auto& x = z.features;
    const double r = weight * (sigmoid(score(x, theta)) - class_index(z.label));
    if (reg_ == 0.0) {
      for (std::size_t k = 0; k < d_; ++k) out[k] += r * x[k];
      out[d_] += r;
      return;
    }
    const double c = weight * reg_;
    for (std::size_t k = 0; k < d_; ++k) out[k] = (out[k] + r * x[k]) + c * theta[k];
    out[d_] = (out[d_] + r) + c * theta[d_];
  }

  void accumulate_hvp(const Instance& z, std::span<const double> theta,
                      std::span<const double> v, double weight,
                      std::span<double> out) const override {
    // One pass for both inner products and one for the update; the rounding
    // matches the separate dot/axpy form.
    const auto& x = z.features;
    double xt = 0.0;
    double xv = 0.0;
    for (std::size_t k = 0; k < d_; ++k) {
      xt += x[k] * theta[k];
      xv += x[k] * v[k];
    }
    const double s = sigmoid(xt + theta[d_]);
    const double r = weight * s * (1.0 - s) * (xv + v[d_]);
    if (reg_ == 0.0) {
      for (std::size_t k = 0; k < d_; ++k) out[k] += r * x[k];
      out[d_] += r;
      return;
    }
    const double c = weight * reg_;
    for (std::size_t k = 0; k < d_; ++k) out[k] = (out[k] + r * x[k]) + c * v[k];
    out[d_] = (out[d_] + r) + c * v[d_];
  }

  Reals predict(std::span<const double> x, std::span<const double> theta) const override {
    return Reals{sigmoid(score(x, theta))};
  }

 private:
  double score(std::span<const double> x, std::span<const double> theta) const {
    return dot(x, theta.first(d_)) + theta[d_];
  }

  std::size_t d_;
  double reg_;
  LayoutPtr layout_;
};

class SoftmaxModel final : public DiffModel {
 public:
  explicit SoftmaxModel(const SoftmaxRegressionSpec& spec)
      : d_(spec.d),
        c_(static_cast<std::size_t>(spec.classes)),
        reg_(per_instance_l2(spec)),
        labels_(classes_label_spec(spec.classes)),
        layout_(Layout::make({{"W", {c_, d_}}, {"b", {c_}}})) {}

  const LayoutPtr& layout() const override { return layout_; }
  std::size_t input_dim() const override { return d_; }
  LabelSpec label_spec() const override { return labels_; }

  double loss(const Instance& z, std::span<const double> theta) const override {
    Reals o = logits(z.features, theta);
    const double lse = softmax_inplace(o);
    const auto y = static_cast<std::size_t>(class_index(z.label));
    return lse - raw_logit(z.features, theta, y) + l2_loss(reg_, theta);
  }

  void accumulate_grad(const Instance& z, std::span<const double> theta, double weight,
                       std::span<double> out) const override {
    Reals e = logits(z.features, theta);
    softmax_inplace(e);
    e[static_cast<std::size_t>(class_index(z.label))] -= 1.0;
    scatter(z.features, e, weight, out);
    add_l2(reg_, theta, weight, out);
  }

  void accumulate_hvp(const Instance& z, std::span<const double> theta,
                      std::span<const double> v, double weight,
                      std::span<double> out) const override {
    Reals p = logits(z.features, theta);
    softmax_inplace(p);
    // R{o} = dW x + db, R{p} = p * R{o} - p <p, R{o}>
    Reals rp = logits(z.features, v);
    const double mean = dot(p, rp);
    for (std::size_t k = 0; k < c_; ++k) rp[k] = p[k] * (rp[k] - mean);
    scatter(z.features, rp, weight, out);
    add_l2(reg_, v, weight, out);
  }

  Reals predict(std::span<const double> x, std::span<const double> theta) const override {
    Reals o = logits(x, theta);
    softmax_inplace(o);
    if (c_ == 2) return Reals{o[1]};
    return o;
  }

 private:
  double raw_logit(std::span<const double> x, std::span<const double> theta,
                   std::size_t k) const {
    return dot(theta.subspan(k * d_, d_), x) + theta[c_ * d_ + k];
  }

  Reals logits(std::span<const double> x, std::span<const double> theta) const {
    Reals o(c_);
    for (std::size_t k = 0; k < c_; ++k) o[k] = raw_logit(x, theta, k);
    return o;
  }

  // out[W] += weight * e x^T, out[b] += weight * e
  void scatter(std::span<const double> x, std::span<const double> e, double weight,
               std::span<double> out) const {
    for (std::size_t k = 0; k < c_; ++k) {
      axpy_into(weight * e[k], x, out.subspan(k * d_, d_));
      out[c_ * d_ + k] += weight * e[k];
    }
  }

  std::size_t d_;
  std::size_t c_;
  double reg_;
  LabelSpec labels_;
  LayoutPtr layout_;
};

// theta = [A (h x r), B (r x d), V (C x h), c (C)], all row-major.
// Forward: s = B x, u = (W0 + A B) x = W0 x + A s, a = tanh(u), o = V a + c.
class AdapterNetModel final : public DiffModel {
 public:
  AdapterNetModel(const LowRankAdapterNetSpec& spec, const ParameterVector& backbone)
      : d_(spec.d),
        h_(spec.hidden),
        r_(spec.rank),
        c_(static_cast<std::size_t>(spec.classes)),
        reg_(per_instance_l2(spec)),
        labels_(classes_label_spec(spec.classes)),
        layout_(parameter_layout(spec)),
        w0_(backbone.values().begin(), backbone.values().end()) {
    off_b_ = h_ * r_;
    off_v_ = off_b_ + r_ * d_;
    off_c_ = off_v_ + c_ * h_;
  }

  const LayoutPtr& layout() const override { return layout_; }
  std::size_t input_dim() const override { return d_; }
  LabelSpec label_spec() const override { return labels_; }

  double loss(const Instance& z, std::span<const double> theta) const override {
    Forward f = forward(z.features, theta);
    const double lse = softmax_inplace(f.o);
    const auto y = static_cast<std::size_t>(class_index(z.label));
    return lse - f.logit_y(y) + l2_loss(reg_, theta);
  }

  void accumulate_grad(const Instance& z, std::span<const double> theta, double weight,
                       std::span<double> out) const override {
    Forward f = forward(z.features, theta);
    softmax_inplace(f.o);
    f.o[static_cast<std::size_t>(class_index(z.label))] -= 1.0;
    const auto& e = f.o;

    Reals du(h_);  // dL/du = (V^T e) * (1 - a^2)
    for (std::size_t j = 0; j < h_; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < c_; ++k) s += V(theta, k, j) * e[k];
      du[j] = s * (1.0 - f.a[j] * f.a[j]);
    }
    // head
    for (std::size_t k = 0; k < c_; ++k) {
      axpy_into(weight * e[k], f.a, out.subspan(off_v_ + k * h_, h_));
      out[off_c_ + k] += weight * e[k];
    }
    // A += du s^T
    for (std::size_t j = 0; j < h_; ++j) {
      axpy_into(weight * du[j], f.s, out.subspan(j * r_, r_));
    }
    // B += (A^T du) x^T
    for (std::size_t q = 0; q < r_; ++q) {
      double ds = 0.0;
      for (std::size_t j = 0; j < h_; ++j) ds += A(theta, j, q) * du[j];
      axpy_into(weight * ds, z.features, out.subspan(off_b_ + q * d_, d_));
    }
    add_l2(reg_, theta, weight, out);
  }

  // Directional derivative (R-operator) of the gradient along v.
  void accumulate_hvp(const Instance& z, std::span<const double> theta,
                      std::span<const double> v, double weight,
                      std::span<double> out) const override {
    const auto& x = z.features;
    Forward f = forward(x, theta);
    softmax_inplace(f.o);
    const Reals p = f.o;
    Reals e = p;
    e[static_cast<std::size_t>(class_index(z.label))] -= 1.0;

    // R{s} = dB x
    Reals rs(r_);
    for (std::size_t q = 0; q < r_; ++q) rs[q] = dot(v.subspan(off_b_ + q * d_, d_), x);
    // R{u} = dA s + A R{s};  R{a} = (1 - a^2) R{u}
    Reals ra(h_);
    for (std::size_t j = 0; j < h_; ++j) {
      double ru = 0.0;
      for (std::size_t q = 0; q < r_; ++q) ru += A(v, j, q) * f.s[q] + A(theta, j, q) * rs[q];
      ra[j] = (1.0 - f.a[j] * f.a[j]) * ru;
    }
    // R{o} = dV a + V R{a} + dc;  R{e} = R{p} = p * (R{o} - <p, R{o}>)
    Reals re(c_);
    for (std::size_t k = 0; k < c_; ++k) {
      double ro = v[off_c_ + k];
      for (std::size_t j = 0; j < h_; ++j) ro += V(v, k, j) * f.a[j] + V(theta, k, j) * ra[j];
      re[k] = ro;
    }
    const double mean = dot(p, re);
    for (std::size_t k = 0; k < c_; ++k) re[k] = p[k] * (re[k] - mean);

    // head: R{dV} = R{e} a^T + e R{a}^T,  R{dc} = R{e}
    for (std::size_t k = 0; k < c_; ++k) {
      auto row = out.subspan(off_v_ + k * h_, h_);
      axpy_into(weight * re[k], f.a, row);
      axpy_into(weight * e[k], ra, row);
      out[off_c_ + k] += weight * re[k];
    }

    // delta_a = V^T e;  R{delta_a} = dV^T e + V^T R{e}
    // delta_u = delta_a (1 - a^2);  R{delta_u} = R{delta_a} (1 - a^2) - 2 a R{a} delta_a
    Reals du(h_);
    Reals rdu(h_);
    for (std::size_t j = 0; j < h_; ++j) {
      double da = 0.0;
      double rda = 0.0;
      for (std::size_t k = 0; k < c_; ++k) {
        da += V(theta, k, j) * e[k];
        rda += V(v, k, j) * e[k] + V(theta, k, j) * re[k];
      }
      const double g = 1.0 - f.a[j] * f.a[j];
      du[j] = da * g;
      rdu[j] = rda * g - 2.0 * f.a[j] * ra[j] * da;
    }

    // R{dA} = R{delta_u} s^T + delta_u R{s}^T
    for (std::size_t j = 0; j < h_; ++j) {
      auto row = out.subspan(j * r_, r_);
      axpy_into(weight * rdu[j], f.s, row);
      axpy_into(weight * du[j], rs, row);
    }
    // delta_s = A^T delta_u;  R{delta_s} = dA^T delta_u + A^T R{delta_u};  R{dB} = R{delta_s} x^T
    for (std::size_t q = 0; q < r_; ++q) {
      double rds = 0.0;
      for (std::size_t j = 0; j < h_; ++j) rds += A(v, j, q) * du[j] + A(theta, j, q) * rdu[j];
      axpy_into(weight * rds, x, out.subspan(off_b_ + q * d_, d_));
    }
    add_l2(reg_, v, weight, out);
  }

  Reals predict(std::span<const double> x, std::span<const double> theta) const override {
    Forward f = forward(x, theta);
    softmax_inplace(f.o);
    if (c_ == 2) return Reals{f.o[1]};
    return std::move(f.o);
  }

 private:
  struct Forward {
    Reals s;
    Reals a;
    Reals o;
    Reals raw;  // logits before softmax

    double logit_y(std::size_t y) const { return raw[y]; }
  };

  double A(std::span<const double> t, std::size_t j, std::size_t q) const { return t[j * r_ + q]; }
  double V(std::span<const double> t, std::size_t k, std::size_t j) const {
    return t[off_v_ + k * h_ + j];
  }

  Forward forward(std::span<const double> x, std::span<const double> theta) const {
    Forward f;
    f.s.resize(r_);
    for (std::size_t q = 0; q < r_; ++q) f.s[q] = dot(theta.subspan(off_b_ + q * d_, d_), x);
    f.a.resize(h_);
    for (std::size_t j = 0; j < h_; ++j) {
      double u = dot(std::span<const double>(w0_).subspan(j * d_, d_), x);
      for (std::size_t q = 0; q < r_; ++q) u += A(theta, j, q) * f.s[q];
      f.a[j] = std::tanh(u);
    }
    f.o.resize(c_);
    for (std::size_t k = 0; k < c_; ++k) {
      f.o[k] = theta[off_c_ + k] + dot(theta.subspan(off_v_ + k * h_, h_), f.a);
    }
    f.raw = f.o;
    return f;
  }

  std::size_t d_, h_, r_, c_;
  double reg_;
  LabelSpec labels_;
  LayoutPtr layout_;
  Reals w0_;
  std::size_t off_b_ = 0, off_v_ = 0, off_c_ = 0;
};

Reals gaussian(std::size_t count, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Reals out(count);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace

std::string_view model_kind(const ModelSpec& spec) {
  return std::visit(Overloaded{[](const LogisticRegressionSpec&) { return "logistic"; },
                               [](const SoftmaxRegressionSpec&) { return "softmax"; },
                               [](const LowRankAdapterNetSpec&) { return "adapter_net"; }},
                    spec);
}

void validate_spec(const ModelSpec& spec) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::SpecError, msg); };
  std::visit(
      Overloaded{
          [&](const LogisticRegressionSpec& s) {
            if (s.d == 0) fail("logistic: d must be positive");
            if (!(s.l2 > 0.0)) fail("logistic: l2 must be > 0");
          },
          [&](const SoftmaxRegressionSpec& s) {
            if (s.d == 0) fail("softmax: d must be positive");
            if (s.classes < 2) fail("softmax: classes must be >= 2");
            if (!(s.l2 > 0.0)) fail("softmax: l2 must be > 0");
          },
          [&](const LowRankAdapterNetSpec& s) {
            if (s.d == 0 || s.hidden == 0) fail("adapter_net: d and hidden must be positive");
            if (s.classes < 2) fail("adapter_net: classes must be >= 2");
            if (s.rank < 1 || s.rank > std::min(s.d, s.hidden)) {
              fail(fmt::format("adapter_net: rank {} outside [1, min(d, hidden) = {}]", s.rank,
                               std::min(s.d, s.hidden)));
            }
            if (!(s.l2 >= 0.0)) fail("adapter_net: l2 must be >= 0");
          }},
      spec);
}

std::size_t trainable_count(const ModelSpec& spec) {
  return std::visit(
      Overloaded{[](const LogisticRegressionSpec& s) { return s.d + 1; },
                 [](const SoftmaxRegressionSpec& s) {
                   return (s.d + 1) * static_cast<std::size_t>(s.classes);
                 },
                 [](const LowRankAdapterNetSpec& s) {
                   return s.rank * (s.hidden + s.d) +
                          (s.hidden + 1) * static_cast<std::size_t>(s.classes);
                 }},
      spec);
}

std::size_t input_dim(const ModelSpec& spec) {
  return std::visit([](const auto& s) { return s.d; }, spec);
}

LabelSpec label_spec_of(const ModelSpec& spec) {
  return std::visit(Overloaded{[](const LogisticRegressionSpec&) {
                                 return LabelSpec{LabelKind::binary, 2};
                               },
                               [](const auto& s) { return classes_label_spec(s.classes); }},
                    spec);
}

bool is_convex(const ModelSpec& spec) {
  return !std::holds_alternative<LowRankAdapterNetSpec>(spec);
}

double per_instance_l2(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) {
        return s.l2 / static_cast<double>(std::max<std::size_t>(s.reg_count, 1));
      },
      spec);
}

ModelSpec bind_regularization(ModelSpec spec, std::size_t n) {
  std::visit(
      [n](auto& s) {
        if (s.reg_count == 0) s.reg_count = n;
      },
      spec);
  return spec;
}

LayoutPtr parameter_layout(const ModelSpec& spec) {
  return std::visit(
      Overloaded{[](const LogisticRegressionSpec& s) {
                   return Layout::make({{"w", {s.d}}, {"b", {1}}});
                 },
                 [](const SoftmaxRegressionSpec& s) {
                   const auto c = static_cast<std::size_t>(s.classes);
                   return Layout::make({{"W", {c, s.d}}, {"b", {c}}});
                 },
                 [](const LowRankAdapterNetSpec& s) {
                   const auto c = static_cast<std::size_t>(s.classes);
                   return Layout::make({{"A", {s.hidden, s.rank}},
                                        {"B", {s.rank, s.d}},
                                        {"V", {c, s.hidden}},
                                        {"c", {c}}});
                 }},
      spec);
}

ParameterVector make_backbone(const ModelSpec& spec) {
  if (const auto* s = std::get_if<LowRankAdapterNetSpec>(&spec)) {
    std::mt19937_64 rng(s->backbone_seed);
    auto values = gaussian(s->hidden * s->d, 1.0 / std::sqrt(static_cast<double>(s->d)), rng);
    return ParameterVector(Layout::make({{"W0", {s->hidden, s->d}}}), std::move(values));
  }
  return ParameterVector();
}

ParameterVector initial_parameters(const ModelSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  std::mt19937_64 rng(seed);
  auto layout = parameter_layout(spec);
  if (const auto* s = std::get_if<LowRankAdapterNetSpec>(&spec)) {
    Reals values(layout->size(), 0.0);
    const auto a = gaussian(s->hidden * s->rank, 0.1, rng);
    std::copy(a.begin(), a.end(), values.begin());
    const auto* v = layout->find("V");
    const auto head = gaussian(v->size(), 0.1, rng);
    std::copy(head.begin(), head.end(), values.begin() + static_cast<std::ptrdiff_t>(v->offset));
    return ParameterVector(layout, std::move(values));
  }
  return ParameterVector(layout, gaussian(layout->size(), 0.01, rng));
}

std::unique_ptr<DiffModel> make_model(const ModelSpec& spec) {
  validate_spec(spec);
  return make_model(spec, make_backbone(spec));
}

std::unique_ptr<DiffModel> make_model(const ModelSpec& spec, const ParameterVector& frozen_base) {
  validate_spec(spec);
  return std::visit(
      Overloaded{
          [&](const LogisticRegressionSpec& s) -> std::unique_ptr<DiffModel> {
            if (!frozen_base.empty()) throw Error(ErrorCode::SpecError, "logistic has no backbone");
            return std::make_unique<LogisticModel>(s);
          },
          [&](const SoftmaxRegressionSpec& s) -> std::unique_ptr<DiffModel> {
            if (!frozen_base.empty()) throw Error(ErrorCode::SpecError, "softmax has no backbone");
            return std::make_unique<SoftmaxModel>(s);
          },
          [&](const LowRankAdapterNetSpec& s) -> std::unique_ptr<DiffModel> {
            if (frozen_base.size() != s.hidden * s.d) {
              throw Error(ErrorCode::SpecError,
                          fmt::format("adapter_net backbone has {} values, expected {}",
                                      frozen_base.size(), s.hidden * s.d));
            }
            return std::make_unique<AdapterNetModel>(s, frozen_base);
          }},
      spec);
}

TrainConfig default_train_config(const ModelSpec& spec) {
  TrainConfig cfg;
  if (!is_convex(spec)) {
    cfg.optimizer = TrainOptimizer::adam;
    cfg.lr = 1e-2;
    cfg.tol = 1e-5;
    cfg.max_epochs = 20000;
  }
  return cfg;
}

double risk_grad_norm(const DiffModel& model, const Dataset& data, const ParameterVector& theta) {
  Reals g(model.num_params(), 0.0);
  accumulate_batch_grad(model, data.instances(), theta.values(),
                        1.0 / static_cast<double>(data.n()), g);
  return norm2(g);
}

TrainedModel train(const ModelSpec& spec, const Dataset& data, const TrainConfig& cfg) {
  const auto bound = bind_regularization(spec, data.n());
  return train_from(bound, data, cfg, initial_parameters(bound, cfg.seed));
}

TrainedModel train_from(const ModelSpec& spec, const Dataset& data, const TrainConfig& cfg,
                        ParameterVector init) {
  const auto bound = bind_regularization(spec, data.n());
  if (!(cfg.lr > 0.0)) throw Error(ErrorCode::ConfigError, "train lr must be > 0");
  TrainedModel out{bound, make_backbone(bound), std::move(init), cfg, false, 0.0, 0};
  const auto model = out.model();
  model->check_params(out.adapter);
  for (const auto& z : data.instances()) model->check_instance(z);

  const auto p = model->num_params();
  const double inv_n = 1.0 / static_cast<double>(data.n());
  auto theta = out.adapter.mutable_values();
  Reals g(p);
  Reals m(cfg.optimizer == TrainOptimizer::adam ? p : 0, 0.0);
  Reals v(m.size(), 0.0);

  auto gradient = [&] {
    std::fill(g.begin(), g.end(), 0.0);
    accumulate_batch_grad(*model, data.instances(), theta, inv_n, g);
    if (!all_finite(g)) {
      throw Error(ErrorCode::TrainingDiverged,
                  fmt::format("gradient became non-finite after {} epochs", out.epochs));
    }
    return norm2(g);
  };

  double gnorm = gradient();
  while (gnorm > cfg.tol && out.epochs < cfg.max_epochs) {
    ++out.epochs;
    if (cfg.optimizer == TrainOptimizer::gd) {
      axpy_into(-cfg.lr, g, theta);
    } else {
      const double t = static_cast<double>(out.epochs);
      const double c1 = 1.0 - std::pow(cfg.beta1, t);
      const double c2 = 1.0 - std::pow(cfg.beta2, t);
      for (std::size_t i = 0; i < p; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        theta[i] -= cfg.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
      }
    }
    if (!all_finite(theta)) {
      throw Error(ErrorCode::TrainingDiverged,
                  fmt::format("parameters became non-finite at epoch {}", out.epochs));
    }
    gnorm = gradient();
  }
  const double risk = empirical_risk(*model, data.instances(), theta);
  if (!std::isfinite(risk)) throw Error(ErrorCode::TrainingDiverged, "training loss is not finite");
  out.final_grad_norm = gnorm;
  out.converged = gnorm <= cfg.tol;
  return out;
}

}  // namespace unlearn
