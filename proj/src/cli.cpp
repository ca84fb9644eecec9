// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "unlearn/bench.hpp"
#include "unlearn/checkpoint.hpp"
#include "unlearn/digest.hpp"
#include "unlearn/eraser.hpp"
#include "unlearn/errors.hpp"

namespace unlearn {
namespace fs = std::filesystem;

namespace {

/// Raised for problems the user fixes on the command line (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Invocation {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::vector<std::string> overrides;
};

/// Resolved run context: the effective config, its root seed and the
/// manifest digest stamped on every artifact.
struct Run {
  fs::path out;
  json config;
  std::uint64_t root_seed = 0;
  json seeds = json::object();
  std::string digest;

  std::uint64_t seed_for(const std::string& label) {
    const auto s = derive_seed(root_seed, label);
    seeds[label] = s;
    return s;
  }
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

json load_config(const Invocation& inv) {
  json config = json::object();
  if (!inv.config_path.empty()) {
    if (!fs::exists(inv.config_path)) {
      throw UsageError(fmt::format("config file '{}' does not exist", inv.config_path));
    }
    config = read_json_file(inv.config_path);
    if (!config.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  } else if (inv.command != "selfcheck") {
    throw UsageError("--config is required");
  }
  for (const auto& o : inv.overrides) apply_override(config, o);
  return config;
}

std::uint64_t root_seed_of(const json& config, const Invocation& inv) {
  if (inv.seed) return *inv.seed;
  return get_or<std::uint64_t>(config, "seed", 0, "config");
}

/// The manifest is written before any work so a failed run still documents
/// what was attempted; the digest covers everything except itself.
void write_manifest(Run& run, const std::string& command) {
  json manifest{{"format_version", kFormatVersion},
                {"command", command},
                {"config", run.config},
                {"root_seed", run.root_seed},
                {"seeds", run.seeds}};
  run.digest = sha256_hex(dump_json(manifest, -1));
  manifest["manifest_digest"] = run.digest;
  write_text_file(run.out / "manifest.json", dump_json(manifest));
}

json stamped(json body, const Run& run) {
  body["format_version"] = kFormatVersion;
  body["manifest_digest"] = run.digest;
  return body;
}

UnlearnRequest load_request(const json& value) {
  if (value.is_string()) return request_from_json(read_json_file(value.get<std::string>()));
  return request_from_json(value);
}

json metrics_to_json(const Metrics& m) {
  json out{{"accuracy", m.accuracy}, {"mean_loss", m.mean_loss}};
  if (m.auc) out["auc"] = *m.auc;
  if (m.macro_f1) out["macro_f1"] = *m.macro_f1;
  return out;
}

LabelSpec labels_from_config(const json& config) {
  const auto kind = label_kind_from_name(get_or<std::string>(config, "label_kind", "binary", "config"));
  const int classes = get_or<int>(config, "classes", kind == LabelKind::binary ? 2 : 0, "config");
  return LabelSpec{kind, classes};
}

int cmd_train(Run& run) {
  require_known_keys(run.config, {"seed", "model", "train", "data"}, "config");
  const auto spec = model_spec_from_json(run.config.at("model"));
  auto cfg = default_train_config(spec);
  const json train_json = run.config.value("train", json::object());
  cfg = train_config_from_json(train_json, cfg);
  if (!train_json.contains("seed")) cfg.seed = run.seed_for("train");
  const auto data_cfg = data_config_from_json(run.config.value("data", json::object()));
  if (data_cfg.generator != "csv") {
    run.seed_for("data");
    run.seed_for("test");
  }
  run.config["train"] = train_config_to_json(cfg);
  run.config["data"] = data_config_to_json(data_cfg);
  write_manifest(run, "train");

  const auto split = load_split(data_cfg, spec, run.root_seed);
  write_csv(run.out / "train.csv", split.train);
  write_csv(run.out / "test.csv", split.test);
  const auto start = std::chrono::steady_clock::now();
  const auto trained = train(spec, split.train, cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_checkpoint(run.out / "checkpoint.json", trained, run.digest);
  write_text_file(run.out / "timings.json",
                  dump_json(stamped(json{{"train_seconds", seconds}}, run)));
  return kExitOk;
}

int cmd_corrupt(Run& run) {
  require_known_keys(run.config, {"seed", "data", "label_kind", "classes", "corruption"},
                     "config");
  auto spec = corruption_spec_from_json(run.config.at("corruption"));
  spec.seed = run.seed_for("corrupt");
  write_manifest(run, "corrupt");
  const auto data = read_csv(get_as<std::string>(run.config, "data", "config"),
                             labels_from_config(run.config));
  const auto result = corrupt(data, spec);
  write_csv(run.out / "corrupted.csv", result.corrupted);
  write_text_file(run.out / "request.json",
                  dump_json(stamped(request_to_json(result.truth), run)));
  return kExitOk;
}

int cmd_unlearn(Run& run, const std::optional<std::string>& method) {
  require_known_keys(run.config,
                     {"seed", "checkpoint", "data", "request", "method", "solver", "force",
                      "max_fraction", "warn_fraction"},
                     "config");
  EraserOptions opts;
  if (method) run.config["method"] = *method;
  opts.method = method_from_name(get_or<std::string>(run.config, "method", "minibatch", "config"));
  const json solver_json = run.config.value("solver", json::object());
  opts.solve = solve_config_from_json(solver_json);
  if (!solver_json.contains("seed")) opts.solve.seed = run.seed_for("solve");
  opts.force = get_or<bool>(run.config, "force", false, "config");
  opts.max_fraction = get_or<double>(run.config, "max_fraction", opts.max_fraction, "config");
  opts.warn_fraction = get_or<double>(run.config, "warn_fraction", opts.warn_fraction, "config");
  run.config["solver"] = solve_config_to_json(opts.solve);
  write_manifest(run, "unlearn");

  const auto trained = load_checkpoint(get_as<std::string>(run.config, "checkpoint", "config"));
  const auto data = read_csv(get_as<std::string>(run.config, "data", "config"),
                             label_spec_of(trained.spec));
  if (!run.config.contains("request")) throw Error(ErrorCode::ConfigError, "config: missing 'request'");
  const auto req = load_request(run.config.at("request"));
  const auto outcome = unlearn(trained, data, req, opts);
  write_text_file(run.out / "outcome.json", dump_json(outcome_to_json(outcome, run.digest)));
  save_checkpoint(run.out / "checkpoint.json", outcome.new_model, run.digest);
  write_text_file(run.out / "timings.json",
                  dump_json(stamped(json{{"solve_seconds", outcome.solve_report.wall_clock_s}},
                                    run)));
  return kExitOk;
}

int cmd_retrain(Run& run) {
  require_known_keys(run.config, {"seed", "checkpoint", "data", "request", "train"}, "config");
  write_manifest(run, "retrain");
  const auto source = load_checkpoint(get_as<std::string>(run.config, "checkpoint", "config"));
  const auto data = read_csv(get_as<std::string>(run.config, "data", "config"),
                             label_spec_of(source.spec));
  if (!run.config.contains("request")) throw Error(ErrorCode::ConfigError, "config: missing 'request'");
  const auto req = load_request(run.config.at("request"));
  auto cfg = source.train_config;
  if (run.config.contains("train")) cfg = train_config_from_json(run.config.at("train"), cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto retrained = retrain_oracle(source.spec, data, req, cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_checkpoint(run.out / "checkpoint.json", retrained, run.digest);
  write_text_file(run.out / "timings.json",
                  dump_json(stamped(json{{"retrain_seconds", seconds}}, run)));
  return kExitOk;
}

int cmd_evaluate(Run& run, std::ostream& out) {
  require_known_keys(run.config, {"seed", "checkpoint", "data"}, "config");
  write_manifest(run, "evaluate");
  const auto trained = load_checkpoint(get_as<std::string>(run.config, "checkpoint", "config"));
  const auto data = read_csv(get_as<std::string>(run.config, "data", "config"),
                             label_spec_of(trained.spec));
  const auto body = stamped(json{{"metrics", metrics_to_json(evaluate(trained, data))}}, run);
  write_text_file(run.out / "metrics.json", dump_json(body));
  out << dump_json(body);
  return kExitOk;
}

int cmd_compare(Run& run, std::ostream& out) {
  require_known_keys(run.config, {"seed", "reference", "checkpoints", "data"}, "config");
  write_manifest(run, "compare");
  const auto reference = load_checkpoint(get_as<std::string>(run.config, "reference", "config"));
  std::optional<Dataset> data;
  if (run.config.contains("data")) {
    data = read_csv(get_as<std::string>(run.config, "data", "config"),
                    label_spec_of(reference.spec));
  }
  json rows = json::array();
  for (const auto& path : get_as<std::vector<std::string>>(run.config, "checkpoints", "config")) {
    const auto other = load_checkpoint(path);
    if (other.adapter.size() != reference.adapter.size()) {
      throw Error(ErrorCode::LayoutMismatch, fmt::format("'{}' has a different layout", path));
    }
    const auto diff = axpy(-1.0, reference.adapter, other.adapter);
    json row{{"checkpoint", path}, {"param_distance", norm2(diff.values())}};
    if (data) row["metrics"] = metrics_to_json(evaluate(other, *data));
    rows.push_back(std::move(row));
  }
  json body{{"rows", std::move(rows)}};
  if (data) body["reference_metrics"] = metrics_to_json(evaluate(reference, *data));
  body = stamped(std::move(body), run);
  write_text_file(run.out / "compare.json", dump_json(body));
  out << dump_json(body);
  return kExitOk;
}

int cmd_experiment(Run& run, const std::optional<std::string>& method,
                   const std::optional<std::uint64_t>& seed, std::ostream& out) {
  if (method) run.config["solve_method"] = *method;
  if (seed) run.config["seeds"] = json::array({*seed});
  const auto cfg = experiment_config_from_json(run.config);
  run.config = experiment_config_to_json(cfg);
  run.seeds = json::object();
  write_manifest(run, "experiment");
  const auto report = run_experiment(cfg);
  write_report(run.out, report, run.digest);
  out << report_table(report);
  return kExitOk;
}

struct CheckResult {
  std::string name;
  double value;
  double limit;
  bool pass() const { return value <= limit; }
};

int cmd_selfcheck(Run& run, std::ostream& out) {
  write_manifest(run, "selfcheck");
  std::vector<CheckResult> checks;

  const std::vector<ModelSpec> zoo{LogisticRegressionSpec{4, 1.0, 10},
                                   SoftmaxRegressionSpec{4, 3, 1.0, 10},
                                   LowRankAdapterNetSpec{4, 5, 3, 2, 0.1, 10, 7}};
  for (const auto& spec : zoo) {
    const auto model = make_model(spec);
    const auto labels = label_spec_of(spec);
    const auto data = labels.kind == LabelKind::binary
                          ? gaussian_binary(8, 4, 1.0, 11)
                          : gaussian_multiclass(8, 4, labels.classes, 1.0, 11);
    auto theta = initial_parameters(spec, 3);
    auto v = initial_parameters(spec, 5);
    // Move B off zero so every adapter block is exercised.
    for (auto& x : theta.mutable_values()) x += 0.05;
    double grad_err = 0.0;
    double hvp_err = 0.0;
    for (const auto& z : data.instances()) {
      grad_err = std::max(grad_err, fd_grad_check(*model, z, theta, 1e-5));
      hvp_err = std::max(hvp_err, fd_hvp_check(*model, z, theta, v, 1e-5));
    }
    checks.push_back({fmt::format("fd_grad_{}", model_kind(spec)), grad_err, 1e-5});
    checks.push_back({fmt::format("fd_hvp_{}", model_kind(spec)), hvp_err, 1e-5});
  }

  {
    const auto data = gaussian_binary(200, 5, 1.5, 21);
    const auto trained = train(LogisticRegressionSpec{5, 1.0, 0}, data, {});
    const auto model = trained.model();
    ResponseCorrection rc;
    for (InstanceId id : {3u, 17u, 42u, 99u, 150u}) {
      rc.edits.push_back(ResponseEdit{id, 1 - class_index(data.find(id)->label)});
    }
    const auto b = build_b(*model, trained, data, rc);
    SolveConfig cfg;
    cfg.seed = 1;
    const auto dense = solve_dense(*model, trained, data, b, cfg.damping);
    const auto mb = solve_minibatch(*model, trained, data, b, cfg);
    const auto diff = axpy(-1.0, dense.delta, mb.delta);
    checks.push_back({"dense_vs_minibatch_rel_err",
                      norm2(diff.values()) / norm2(dense.delta.values()), 1e-3});
  }

  bool ok = true;
  json rows = json::array();
  for (const auto& c : checks) {
    ok = ok && c.pass();
    out << fmt::format("{:<32} {:>12.3e} <= {:.0e}  {}\n", c.name, c.value, c.limit,
                       c.pass() ? "PASS" : "FAIL");
    rows.push_back(json{{"name", c.name}, {"value", c.value}, {"limit", c.limit},
                        {"pass", c.pass()}});
  }
  write_text_file(run.out / "selfcheck.json",
                  dump_json(stamped(json{{"checks", std::move(rows)}, {"pass", ok}}, run)));
  return ok ? kExitOk : kExitDomainError;
}

}  // namespace

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError(fmt::format("override '{}' is not key=value", assignment));
  }
  const auto key = assignment.substr(0, eq);
  const auto raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError(fmt::format("override key '{}' is malformed", key));
    if (!node->is_object()) {
      throw UsageError(fmt::format("override '{}' descends into a non-object", key));
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Influence-based unlearning toolkit"};
  app.require_subcommand(1);
  Invocation inv;
  std::uint64_t seed_value = 0;
  std::string method_value;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"train", "Train a model and write a checkpoint"},
      {"corrupt", "Corrupt a CSV dataset and write the undoing request"},
      {"unlearn", "Apply an unlearning request to a checkpoint"},
      {"retrain", "Retrain from the original initialization on edited data"},
      {"evaluate", "Evaluate a checkpoint on a dataset"},
      {"compare", "Parameter distances and metrics against a reference checkpoint"},
      {"experiment", "Run a corrupt/train/unlearn/retrain experiment"},
      {"selfcheck", "Finite-difference and solver agreement checks"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "JSON config file");
    sub->add_option("--out", inv.out_dir, "Output directory (default ./runs/<timestamp>)");
    sub->add_option("--seed", seed_value, "Root seed override");
    sub->add_option("--method", method_value, "Solver: minibatch|cg|lissa|dense")
        ->check(CLI::IsMember({"minibatch", "cg", "lissa", "dense"}));
    sub->add_option("overrides", inv.overrides, "Dotted config overrides, e.g. solver.lr=0.01");
  }

  std::vector<std::string> reversed(args.size() > 0 ? args.begin() + 1 : args.begin(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) {
    inv.command = sub->get_name();
    if (sub->count("--seed") > 0) inv.seed = seed_value;
    if (sub->count("--method") > 0) inv.method = method_value;
  }

  try {
    Run run;
    run.config = load_config(inv);
    run.root_seed = root_seed_of(run.config, inv);
    if (inv.command != "experiment") run.config["seed"] = run.root_seed;
    run.out = inv.out_dir.empty() ? fs::path("runs") / timestamp() : fs::path(inv.out_dir);
    fs::create_directories(run.out);
    if (inv.method && inv.command != "unlearn" && inv.command != "experiment") {
      throw UsageError("--method applies to unlearn and experiment only");
    }

    if (inv.command == "train") return cmd_train(run);
    if (inv.command == "corrupt") return cmd_corrupt(run);
    if (inv.command == "unlearn") return cmd_unlearn(run, inv.method);
    if (inv.command == "retrain") return cmd_retrain(run);
    if (inv.command == "evaluate") return cmd_evaluate(run, out);
    if (inv.command == "compare") return cmd_compare(run, out);
    if (inv.command == "experiment") return cmd_experiment(run, inv.method, inv.seed, out);
    return cmd_selfcheck(run, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
    return kExitDomainError;
  }
}

}  // namespace unlearn
