// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

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

void dump_into(const json& v, int indent, int depth, std::string& out) {
  const auto pad = [&](int d) {
    if (indent >= 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  switch (v.type()) {
    case json::value_t::number_float: {
      const double d = v.get<double>();
      if (std::isfinite(d)) {
        out += fmt::format("{:.16e}", d);
      } else {
        out += "null";
      }
      return;
    }
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        out += json(it.key()).dump();
        out += indent >= 0 ? ": " : ":";
        dump_into(it.value(), indent, depth + 1, out);
      }
      pad(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(v.begin(), v.end(),
                                    [](const json& e) { return e.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat || indent < 0 ? "," : ",";
        if (flat && !first && indent >= 0) out += ' ';
        first = false;
        if (!flat) pad(depth + 1);
        dump_into(e, indent, depth + 1, out);
      }
      if (!flat) pad(depth);
      out += ']';
      return;
    }
    default:
      out += v.dump();
  }
}

void expect(bool ok, std::string_view context, std::string_view what) {
  if (!ok) throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", context, what));
}

}  // namespace

std::string dump_json(const json& value, int indent) {
  std::string out;
  dump_into(value, indent, 0, out);
  if (indent >= 0) out += '\n';
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
  out << text;
}

void require_known_keys(const json& object, std::initializer_list<std::string_view> allowed,
                        std::string_view context) {
  expect(object.is_object(), context, "expected a JSON object");
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (auto a : allowed) known = known || a == it.key();
    if (!known) {
      throw Error(ErrorCode::ConfigError, fmt::format("{}: unknown key '{}'", context, it.key()));
    }
  }
}

template <class T>
T get_as(const json& object, std::string_view key, std::string_view context) {
  const std::string k(key);
  expect(object.contains(k), context, fmt::format("missing key '{}'", key));
  const auto& v = object.at(k);
  try {
    if constexpr (std::is_same_v<T, double>) {
      expect(v.is_number(), context, fmt::format("'{}' must be a number", key));
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      expect(v.is_number_integer(), context, fmt::format("'{}' must be an integer", key));
      if constexpr (std::is_unsigned_v<T>) {
        expect(v.get<long long>() >= 0 || v.is_number_unsigned(), context,
               fmt::format("'{}' must be non-negative", key));
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      expect(v.is_boolean(), context, fmt::format("'{}' must be a boolean", key));
    } else if constexpr (std::is_same_v<T, std::string>) {
      expect(v.is_string(), context, fmt::format("'{}' must be a string", key));
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: bad '{}': {}", context, key, e.what()));
  }
}

template double get_as<double>(const json&, std::string_view, std::string_view);
template int get_as<int>(const json&, std::string_view, std::string_view);
template std::size_t get_as<std::size_t>(const json&, std::string_view, std::string_view);
template std::uint32_t get_as<std::uint32_t>(const json&, std::string_view, std::string_view);
template bool get_as<bool>(const json&, std::string_view, std::string_view);
template std::string get_as<std::string>(const json&, std::string_view, std::string_view);
template std::vector<double> get_as<std::vector<double>>(const json&, std::string_view,
                                                          std::string_view);
template std::vector<std::string> get_as<std::vector<std::string>>(const json&, std::string_view,
                                                                    std::string_view);

json model_spec_to_json(const ModelSpec& spec) {
  return std::visit(
      Overloaded{[](const LogisticRegressionSpec& s) {
                   return json{{"kind", "logistic"}, {"d", s.d}, {"l2", s.l2},
                               {"reg_count", s.reg_count}};
                 },
                 [](const SoftmaxRegressionSpec& s) {
                   return json{{"kind", "softmax"}, {"d", s.d}, {"classes", s.classes},
                               {"l2", s.l2}, {"reg_count", s.reg_count}};
                 },
                 [](const LowRankAdapterNetSpec& s) {
                   return json{{"kind", "adapter_net"}, {"d", s.d},
                               {"hidden", s.hidden}, {"classes", s.classes},
                               {"rank", s.rank}, {"l2", s.l2},
                               {"reg_count", s.reg_count}, {"backbone_seed", s.backbone_seed}};
                 }},
      spec);
}

ModelSpec model_spec_from_json(const json& j) {
  constexpr std::string_view ctx = "model";
  const auto kind = get_as<std::string>(j, "kind", ctx);
  ModelSpec spec;
  if (kind == "logistic") {
    require_known_keys(j, {"kind", "d", "l2", "reg_count"}, ctx);
    LogisticRegressionSpec s;
    s.d = get_as<std::size_t>(j, "d", ctx);
    s.l2 = get_or<double>(j, "l2", s.l2, ctx);
    s.reg_count = get_or<std::size_t>(j, "reg_count", 0, ctx);
    spec = s;
  } else if (kind == "softmax") {
    require_known_keys(j, {"kind", "d", "classes", "l2", "reg_count"}, ctx);
    SoftmaxRegressionSpec s;
    s.d = get_as<std::size_t>(j, "d", ctx);
    s.classes = get_as<int>(j, "classes", ctx);
    s.l2 = get_or<double>(j, "l2", s.l2, ctx);
    s.reg_count = get_or<std::size_t>(j, "reg_count", 0, ctx);
    spec = s;
  } else if (kind == "adapter_net") {
    require_known_keys(j, {"kind", "d", "hidden", "classes", "rank", "l2", "reg_count",
                           "backbone_seed"},
                       ctx);
    LowRankAdapterNetSpec s;
    s.d = get_as<std::size_t>(j, "d", ctx);
    s.hidden = get_as<std::size_t>(j, "hidden", ctx);
    s.classes = get_as<int>(j, "classes", ctx);
    s.rank = get_as<std::size_t>(j, "rank", ctx);
    s.l2 = get_or<double>(j, "l2", s.l2, ctx);
    s.reg_count = get_or<std::size_t>(j, "reg_count", 0, ctx);
    s.backbone_seed = get_or<std::size_t>(j, "backbone_seed", 0, ctx);
    spec = s;
  } else {
    throw Error(ErrorCode::ConfigError, fmt::format("model: unknown kind '{}'", kind));
  }
  validate_spec(spec);
  return spec;
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"optimizer", cfg.optimizer == TrainOptimizer::gd ? "gd" : "adam"},
              {"lr", cfg.lr},
              {"max_epochs", cfg.max_epochs},
              {"tol", cfg.tol},
              {"seed", cfg.seed},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"eps", cfg.eps}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  constexpr std::string_view ctx = "train";
  require_known_keys(j, {"optimizer", "lr", "max_epochs", "tol", "seed", "beta1", "beta2", "eps"},
                     ctx);
  if (j.contains("optimizer")) {
    const auto name = get_as<std::string>(j, "optimizer", ctx);
    expect(name == "gd" || name == "adam", ctx, "optimizer must be 'gd' or 'adam'");
    base.optimizer = name == "gd" ? TrainOptimizer::gd : TrainOptimizer::adam;
  }
  base.lr = get_or<double>(j, "lr", base.lr, ctx);
  base.max_epochs = get_or<std::size_t>(j, "max_epochs", base.max_epochs, ctx);
  base.tol = get_or<double>(j, "tol", base.tol, ctx);
  base.seed = get_or<std::size_t>(j, "seed", base.seed, ctx);
  base.beta1 = get_or<double>(j, "beta1", base.beta1, ctx);
  base.beta2 = get_or<double>(j, "beta2", base.beta2, ctx);
  base.eps = get_or<double>(j, "eps", base.eps, ctx);
  expect(base.lr > 0.0, ctx, "lr must be > 0");
  expect(base.tol > 0.0, ctx, "tol must be > 0");
  return base;
}

json solve_config_to_json(const SolveConfig& cfg) {
  return json{{"optimizer", cfg.optimizer == StepRule::adam ? "adam" : "sgd"},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"eps", cfg.eps},
              {"momentum", cfg.momentum},
              {"lr", cfg.lr},
              {"lr_decay", cfg.lr_decay},
              {"batch_size", cfg.batch_size},
              {"max_epochs", cfg.max_epochs},
              {"grad_tol", cfg.grad_tol},
              {"check_every", cfg.check_every},
              {"damping", cfg.damping},
              {"seed", cfg.seed},
              {"cg_tol", cfg.cg_tol},
              {"cg_max_iters", cfg.cg_max_iters},
              {"lissa_scale", cfg.lissa_scale},
              {"lissa_depth", cfg.lissa_depth},
              {"lissa_repeats", cfg.lissa_repeats}};
}

SolveConfig solve_config_from_json(const json& j, SolveConfig base) {
  constexpr std::string_view ctx = "solver";
  require_known_keys(j,
                     {"optimizer", "beta1", "beta2", "eps", "momentum", "lr", "lr_decay",
                      "batch_size", "max_epochs", "grad_tol", "check_every", "damping", "seed",
                      "cg_tol", "cg_max_iters", "lissa_scale", "lissa_depth", "lissa_repeats"},
                     ctx);
  if (j.contains("optimizer")) {
    const auto name = get_as<std::string>(j, "optimizer", ctx);
    expect(name == "adam" || name == "sgd", ctx, "optimizer must be 'adam' or 'sgd'");
    base.optimizer = name == "adam" ? StepRule::adam : StepRule::sgd;
  }
  base.beta1 = get_or<double>(j, "beta1", base.beta1, ctx);
  base.beta2 = get_or<double>(j, "beta2", base.beta2, ctx);
  base.eps = get_or<double>(j, "eps", base.eps, ctx);
  base.momentum = get_or<double>(j, "momentum", base.momentum, ctx);
  base.lr = get_or<double>(j, "lr", base.lr, ctx);
  base.lr_decay = get_or<double>(j, "lr_decay", base.lr_decay, ctx);
  base.batch_size = get_or<std::size_t>(j, "batch_size", base.batch_size, ctx);
  base.max_epochs = get_or<std::size_t>(j, "max_epochs", base.max_epochs, ctx);
  base.grad_tol = get_or<double>(j, "grad_tol", base.grad_tol, ctx);
  base.check_every = get_or<std::size_t>(j, "check_every", base.check_every, ctx);
  base.damping = get_or<double>(j, "damping", base.damping, ctx);
  base.seed = get_or<std::size_t>(j, "seed", base.seed, ctx);
  base.cg_tol = get_or<double>(j, "cg_tol", base.cg_tol, ctx);
  base.cg_max_iters = get_or<std::size_t>(j, "cg_max_iters", base.cg_max_iters, ctx);
  base.lissa_scale = get_or<double>(j, "lissa_scale", base.lissa_scale, ctx);
  base.lissa_depth = get_or<std::size_t>(j, "lissa_depth", base.lissa_depth, ctx);
  base.lissa_repeats = get_or<std::size_t>(j, "lissa_repeats", base.lissa_repeats, ctx);
  validate_solve_config(base);
  return base;
}

json layout_to_json(const Layout& layout) {
  json out = json::array();
  for (const auto& s : layout.segments()) {
    out.push_back(json{{"name", s.name}, {"offset", s.offset}, {"shape", s.shape}});
  }
  return out;
}

LayoutPtr layout_from_json(const json& j) {
  constexpr std::string_view ctx = "layout";
  expect(j.is_array(), ctx, "expected an array of segments");
  std::vector<Segment> segments;
  for (const auto& s : j) {
    require_known_keys(s, {"name", "offset", "shape"}, ctx);
    segments.push_back(Segment{get_as<std::string>(s, "name", ctx),
                               get_as<std::size_t>(s, "offset", ctx),
                               s.at("shape").get<Shape>()});
  }
  return Layout::from_segments(std::move(segments));
}

json values_to_json(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(v);
  return out;
}

Reals values_from_json(const json& j, std::string_view context) {
  expect(j.is_array(), context, "expected a number array");
  Reals out;
  out.reserve(j.size());
  for (const auto& v : j) {
    expect(v.is_number(), context, "expected a number array");
    out.push_back(v.get<double>());
  }
  return out;
}

json label_to_json(const Label& label) {
  return std::visit([](auto v) { return json(v); }, label);
}

Label label_from_json(const json& j, std::string_view context) {
  if (j.is_number_integer()) return Label{j.get<int>()};
  expect(j.is_number(), context, "label must be a number");
  return Label{j.get<double>()};
}

json request_to_json(const UnlearnRequest& req) {
  json targets = json::array();
  std::visit(Overloaded{[&](const InstanceRemoval& r) {
                          for (auto id : r.target_ids) targets.push_back(id);
                        },
                        [&](const QueryModification& r) {
                          for (const auto& e : r.edits) {
                            targets.push_back(json{{"id", e.id},
                                                   {"new_features", values_to_json(e.new_features)}});
                          }
                        },
                        [&](const ResponseCorrection& r) {
                          for (const auto& e : r.edits) {
                            targets.push_back(
                                json{{"id", e.id}, {"new_label", label_to_json(e.new_label)}});
                          }
                        }},
             req);
  return json{{"task", task_name(task_of(req))}, {"targets", std::move(targets)}};
}

UnlearnRequest request_from_json(const json& j) {
  constexpr std::string_view ctx = "request";
  require_known_keys(j, {"task", "targets", "format_version", "manifest_digest"}, ctx);
  const auto task = task_from_name(get_as<std::string>(j, "task", ctx));
  const auto& targets = j.contains("targets") ? j.at("targets") : json::array();
  expect(targets.is_array(), ctx, "'targets' must be an array");
  switch (task) {
    case TaskKind::IR: {
      InstanceRemoval r;
      for (const auto& t : targets) {
        expect(t.is_number_integer(), ctx, "IR targets must be instance ids");
        r.target_ids.push_back(t.get<InstanceId>());
      }
      return r;
    }
    case TaskKind::QM: {
      QueryModification r;
      for (const auto& t : targets) {
        require_known_keys(t, {"id", "new_features"}, ctx);
        const auto values = values_from_json(t.at("new_features"), ctx);
        r.edits.push_back(QueryEdit{get_as<std::size_t>(t, "id", ctx),
                                    std::vector<double>(values.begin(), values.end())});
      }
      return r;
    }
    case TaskKind::RC: {
      ResponseCorrection r;
      for (const auto& t : targets) {
        require_known_keys(t, {"id", "new_label"}, ctx);
        r.edits.push_back(ResponseEdit{get_as<std::size_t>(t, "id", ctx),
                                       label_from_json(t.at("new_label"), ctx)});
      }
      return r;
    }
  }
  throw Error(ErrorCode::ConfigError, "request: unknown task");
}

json solve_report_to_json(const DeltaSolveReport& report, bool include_timing) {
  json trace = json::array();
  for (const auto& c : report.trace) trace.push_back(json{c.epoch, c.grad_norm});
  json out{{"method", method_name(report.method)},
           {"delta", values_to_json(report.delta.values())},
           {"residual_norm", report.residual_norm},
           {"iterations", report.iterations},
           {"peak_aux_floats", report.peak_aux_floats},
           {"converged", report.converged},
           {"hvp_evals", report.hvp_evals},
           {"damping", report.damping},
           {"trace", std::move(trace)}};
  if (include_timing) out["wall_clock_s"] = report.wall_clock_s;
  return out;
}

}  // namespace unlearn
