// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "unlearn/alloc_audit.hpp"
#include "unlearn/digest.hpp"
#include "unlearn/eraser.hpp"
#include "unlearn/errors.hpp"

namespace unlearn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> gaussian_vector(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(d);
  for (auto& v : x) v = normal(rng);
  return x;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidData, fmt::format("csv row {}: '{}' is not a number", row, s));
  }
}

Label other_label(const Label& label, const LabelSpec& spec, std::mt19937_64& rng) {
  switch (spec.kind) {
    case LabelKind::binary:
      return 1 - class_index(label);
    case LabelKind::multiclass: {
      std::uniform_int_distribution<int> pick(0, spec.classes - 2);
      const int k = pick(rng);
      return k >= class_index(label) ? k + 1 : k;
    }
    case LabelKind::real: {
      std::normal_distribution<double> normal(0.0, 1.0);
      double y = std::get<double>(label);
      double draw = y;
      while (draw == y) draw = normal(rng);
      return draw;
    }
  }
  return label;
}

Label flipped_label(const Label& label, const LabelSpec& spec) {
  switch (spec.kind) {
    case LabelKind::binary:
      return 1 - class_index(label);
    case LabelKind::multiclass:
      return (class_index(label) + 1) % spec.classes;
    case LabelKind::real:
      return -std::get<double>(label);
  }
  return label;
}

double distance(const ParameterVector& a, const ParameterVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  const auto hex = sha256_hex(fmt::format("{}/{}", root, label));
  return std::stoull(hex.substr(0, 15), nullptr, 16);
}

Dataset gaussian_binary(std::size_t n, std::size_t d, double separation, std::uint64_t seed,
                        InstanceId first_id, double prior) {
  if (d == 0) throw Error(ErrorCode::ConfigError, "gaussian_binary needs d >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Instance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = unit(rng) < prior ? 1 : 0;
    auto x = gaussian_vector(d, rng);
    x[0] += (2 * y - 1) * separation;
    out.push_back(Instance{first_id + i, std::move(x), y});
  }
  return Dataset(d, LabelSpec{LabelKind::binary, 2}, std::move(out));
}

Dataset gaussian_multiclass(std::size_t n, std::size_t d, int classes, double separation,
                            std::uint64_t seed, InstanceId first_id) {
  if (d == 0 || classes < 2) {
    throw Error(ErrorCode::ConfigError, "gaussian_multiclass needs d >= 1 and classes >= 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::vector<Instance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = pick(rng);
    auto x = gaussian_vector(d, rng);
    x[static_cast<std::size_t>(y) % d] += separation;
    out.push_back(Instance{first_id + i, std::move(x), y});
  }
  const LabelSpec labels = classes == 2 ? LabelSpec{LabelKind::binary, 2}
                                        : LabelSpec{LabelKind::multiclass, classes};
  return Dataset(d, labels, std::move(out));
}

Dataset teacher_dataset(const LowRankAdapterNetSpec& spec, std::size_t n,
                        std::uint64_t teacher_seed, std::uint64_t seed, InstanceId first_id) {
  const ModelSpec model_spec = spec;
  validate_spec(model_spec);
  const auto model = make_model(model_spec);
  auto theta = ParameterVector::zeros(model->layout());
  {
    std::mt19937_64 rng(teacher_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto& layout = *model->layout();
    auto values = theta.mutable_values();
    const auto fill = [&](const std::string& name, double scale) {
      const auto* seg = layout.find(name);
      for (std::size_t k = 0; k < seg->size(); ++k) values[seg->offset + k] = scale * normal(rng);
    };
    fill("A", 1.0);
    fill("B", 1.0 / std::sqrt(static_cast<double>(spec.d)));
    fill("V", 2.0);
  }
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = gaussian_vector(spec.d, rng);
    const auto probs = model->predict(x, theta.values());
    int y = 0;
    if (spec.classes == 2) {
      y = probs[0] > 0.5 ? 1 : 0;
    } else {
      y = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
    out.push_back(Instance{first_id + i, std::move(x), y});
  }
  return Dataset(spec.d, label_spec_of(model_spec), std::move(out));
}

Dataset read_csv(const std::filesystem::path& path, const LabelSpec& labels) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::InvalidData, fmt::format("'{}' is empty", path.string()));
  }
  const auto header = split_csv_line(line);
  const bool has_id = !header.empty() && header.front() == "id";
  const std::size_t first_feature = has_id ? 1 : 0;
  if (header.size() < first_feature + 2 || header.back() != "label") {
    throw Error(ErrorCode::InvalidData, "csv header must be [id,]f0,...,f{d-1},label");
  }
  const std::size_t d = header.size() - first_feature - 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (header[first_feature + k] != fmt::format("f{}", k)) {
      throw Error(ErrorCode::InvalidData,
                  fmt::format("csv header column {} should be f{}", first_feature + k, k));
    }
  }
  std::vector<Instance> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::InvalidData,
                  fmt::format("csv row {} has {} columns, expected {}", row, cells.size(),
                              header.size()));
    }
    Instance z;
    z.id = has_id ? std::stoull(cells[0]) : row - 1;
    for (std::size_t k = 0; k < d; ++k) z.features.push_back(parse_double(cells[first_feature + k], row));
    const auto& lab = cells.back();
    if (labels.kind == LabelKind::real) {
      z.label = parse_double(lab, row);
    } else {
      const double v = parse_double(lab, row);
      if (v != std::floor(v)) {
        throw Error(ErrorCode::InvalidData, fmt::format("csv row {}: label must be integral", row));
      }
      z.label = static_cast<int>(v);
    }
    out.push_back(std::move(z));
  }
  return Dataset(d, labels, std::move(out));
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::string text = "id";
  for (std::size_t k = 0; k < data.d(); ++k) text += fmt::format(",f{}", k);
  text += ",label\n";
  for (const auto& z : data.instances()) {
    text += fmt::format("{}", z.id);
    for (double v : z.features) text += fmt::format(",{:.17g}", v);
    if (std::holds_alternative<double>(z.label)) {
      text += fmt::format(",{:.17g}\n", std::get<double>(z.label));
    } else {
      text += fmt::format(",{}\n", std::get<int>(z.label));
    }
  }
  write_text_file(path, text);
}

std::string_view corruption_name(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::label_flip: return "label_flip";
    case CorruptionKind::label_randomize: return "label_randomize";
    case CorruptionKind::feature_noise: return "feature_noise";
    case CorruptionKind::feature_zero: return "feature_zero";
  }
  return "?";
}

CorruptionKind corruption_from_name(std::string_view name) {
  for (auto k : {CorruptionKind::label_flip, CorruptionKind::label_randomize,
                 CorruptionKind::feature_noise, CorruptionKind::feature_zero}) {
    if (corruption_name(k) == name) return k;
  }
  throw Error(ErrorCode::ConfigError, fmt::format("unknown corruption kind '{}'", name));
}

Corruption corrupt(const Dataset& data, const CorruptionSpec& spec) {
  if (!(spec.ratio > 0.0 && spec.ratio <= 0.5)) {
    throw Error(ErrorCode::ConfigError, fmt::format("corruption ratio {} not in (0, 0.5]", spec.ratio));
  }
  const double want = spec.ratio * static_cast<double>(data.n());
  if (want < 1.0) {
    throw Error(ErrorCode::NothingToCorrupt,
                fmt::format("ratio {} of {} instances selects nothing", spec.ratio, data.n()));
  }
  const bool on_labels =
      spec.kind == CorruptionKind::label_flip || spec.kind == CorruptionKind::label_randomize;
  if (spec.kind == CorruptionKind::feature_noise && !(spec.sigma > 0.0)) {
    throw Error(ErrorCode::ConfigError, "feature_noise needs sigma > 0");
  }
  if (spec.kind == CorruptionKind::feature_zero &&
      (spec.coords_per_instance == 0 || spec.coords_per_instance > data.d())) {
    throw Error(ErrorCode::ConfigError, "feature_zero needs 1 <= coords_per_instance <= d");
  }

  const auto count = static_cast<std::size_t>(std::llround(want));
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data[a].id < data[b].id; });

  std::vector<Instance> instances(data.instances().begin(), data.instances().end());
  Corruption out{data, InstanceRemoval{}, {}};
  ResponseCorrection rc;
  QueryModification qm;
  std::normal_distribution<double> normal(0.0, spec.sigma);
  for (std::size_t i : order) {
    const Instance& clean = data[i];
    Instance& z = instances[i];
    out.ids.push_back(clean.id);
    switch (spec.kind) {
      case CorruptionKind::label_flip:
        z.label = flipped_label(clean.label, data.label_spec());
        break;
      case CorruptionKind::label_randomize:
        z.label = other_label(clean.label, data.label_spec(), rng);
        break;
      case CorruptionKind::feature_noise:
        for (auto& v : z.features) v += normal(rng);
        break;
      case CorruptionKind::feature_zero: {
        std::vector<std::size_t> coords(data.d());
        std::iota(coords.begin(), coords.end(), 0);
        std::shuffle(coords.begin(), coords.end(), rng);
        for (std::size_t k = 0; k < spec.coords_per_instance; ++k) z.features[coords[k]] = 0.0;
        break;
      }
    }
    if (on_labels) {
      rc.edits.push_back(ResponseEdit{clean.id, clean.label});
    } else {
      qm.edits.push_back(QueryEdit{clean.id, clean.features});
    }
  }
  out.corrupted = data.with_instances(std::move(instances));
  if (on_labels) {
    out.truth = std::move(rc);
  } else {
    out.truth = std::move(qm);
  }
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw Error(ErrorCode::InvalidData, "accuracy needs equal, non-empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size() || truth.empty()) {
    throw Error(ErrorCode::InvalidData, "roc_auc needs equal, non-empty inputs");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::InvalidData, "roc_auc needs both classes present");
  }
  const double np = static_cast<double>(positives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

double macro_f1(std::span<const int> predicted, std::span<const int> truth, int classes) {
  if (predicted.size() != truth.size() || truth.empty() || classes < 2) {
    throw Error(ErrorCode::InvalidData, "macro_f1 needs equal, non-empty inputs");
  }
  double total = 0.0;
  for (int c = 0; c < classes; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      tp += predicted[i] == c && truth[i] == c;
      fp += predicted[i] == c && truth[i] != c;
      fn += predicted[i] != c && truth[i] == c;
    }
    // A class absent from both sides counts as perfectly handled.
    total += tp + fp + fn == 0 ? 1.0
                               : 2.0 * static_cast<double>(tp) /
                                     static_cast<double>(2 * tp + fp + fn);
  }
  return total / classes;
}

Metrics evaluate(const TrainedModel& trained, const Dataset& test) {
  const auto model = trained.model();
  const auto spec = model->label_spec();
  if (spec.kind == LabelKind::real) {
    throw Error(ErrorCode::InvalidData, "evaluate needs a classification model");
  }
  std::vector<int> predicted, truth;
  std::vector<double> scores;
  double loss = 0.0;
  for (const auto& z : test.instances()) {
    model->check_instance(z);
    const auto probs = model->predict(z.features, trained.adapter.values());
    if (spec.kind == LabelKind::binary) {
      scores.push_back(probs[0]);
      predicted.push_back(probs[0] > 0.5 ? 1 : 0);
    } else {
      predicted.push_back(
          static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin()));
    }
    truth.push_back(class_index(z.label));
    loss += model->loss(z, trained.adapter.values());
  }
  Metrics m;
  m.accuracy = accuracy(predicted, truth);
  m.mean_loss = loss / static_cast<double>(test.n());
  if (spec.kind == LabelKind::binary) {
    const bool both = std::count(truth.begin(), truth.end(), 1) > 0 &&
                      std::count(truth.begin(), truth.end(), 0) > 0;
    if (both) m.auc = roc_auc(scores, truth);
  } else {
    m.macro_f1 = macro_f1(predicted, truth, spec.classes);
  }
  return m;
}

TrainedModel retrain_oracle(const ModelSpec& spec, const Dataset& data, const UnlearnRequest& req,
                            const TrainConfig& cfg) {
  validate_request(req, data);
  // Bind to the original size first so a removal keeps the per-instance
  // objective of the source model.
  const auto bound = bind_regularization(spec, data.n());
  return train(bound, apply_request(data, req), cfg);
}

TrainedModel gradient_ascent_baseline(const TrainedModel& trained, const Dataset& data,
                                      const UnlearnRequest& req, std::size_t steps, double lr) {
  if (task_of(req) != TaskKind::IR) {
    throw Error(ErrorCode::ConfigError, "gradient ascent applies to instance removal only");
  }
  validate_request(req, data);
  const auto model = trained.model();
  std::vector<Instance> removed;
  for (auto id : request_ids(req)) removed.push_back(*data.find(id));

  TrainedModel out = trained;
  auto theta = out.adapter.mutable_values();
  Reals g(theta.size());
  for (std::size_t s = 0; s < steps; ++s) {
    std::fill(g.begin(), g.end(), 0.0);
    accumulate_batch_grad(*model, removed, out.adapter.values(), 1.0, g);
    axpy_into(lr, g, theta);
    if (!all_finite(theta)) {
      throw Error(ErrorCode::BaselineDiverged,
                  fmt::format("gradient ascent left finite values at step {}", s + 1));
    }
  }
  if (steps > 0) {
    out.final_grad_norm = risk_grad_norm(*model, apply_request(data, req), out.adapter);
    out.converged = out.final_grad_norm <= out.train_config.tol;
  }
  return out;
}

DataConfig data_config_from_json(const json& d) {
  constexpr std::string_view ctx = "data";
  require_known_keys(d, {"generator", "n_train", "n_test", "separation", "prior", "train_path",
                         "test_path"},
                     ctx);
  DataConfig cfg;
  cfg.generator = get_or<std::string>(d, "generator", cfg.generator, ctx);
  cfg.n_train = get_or<std::size_t>(d, "n_train", cfg.n_train, ctx);
  cfg.n_test = get_or<std::size_t>(d, "n_test", cfg.n_test, ctx);
  cfg.separation = get_or<double>(d, "separation", cfg.separation, ctx);
  cfg.prior = get_or<double>(d, "prior", cfg.prior, ctx);
  cfg.train_path = get_or<std::string>(d, "train_path", "", ctx);
  cfg.test_path = get_or<std::string>(d, "test_path", "", ctx);
  const auto& g = cfg.generator;
  if (g != "gaussian_binary" && g != "gaussian_multiclass" && g != "teacher" && g != "csv") {
    throw Error(ErrorCode::ConfigError, fmt::format("data: unknown generator '{}'", g));
  }
  if (g == "csv" && (cfg.train_path.empty() || cfg.test_path.empty())) {
    throw Error(ErrorCode::ConfigError, "data: csv needs train_path and test_path");
  }
  return cfg;
}

json data_config_to_json(const DataConfig& cfg) {
  return json{{"generator", cfg.generator},   {"n_train", cfg.n_train},
              {"n_test", cfg.n_test},         {"separation", cfg.separation},
              {"prior", cfg.prior},           {"train_path", cfg.train_path},
              {"test_path", cfg.test_path}};
}

CorruptionSpec corruption_spec_from_json(const json& c) {
  constexpr std::string_view ctx = "corruption";
  require_known_keys(c, {"kind", "ratio", "sigma", "coords_per_instance"}, ctx);
  CorruptionSpec spec;
  spec.kind = corruption_from_name(get_as<std::string>(c, "kind", ctx));
  spec.ratio = get_as<double>(c, "ratio", ctx);
  spec.sigma = get_or<double>(c, "sigma", spec.sigma, ctx);
  spec.coords_per_instance =
      get_or<std::size_t>(c, "coords_per_instance", spec.coords_per_instance, ctx);
  return spec;
}

json corruption_spec_to_json(const CorruptionSpec& spec) {
  return json{{"kind", corruption_name(spec.kind)},
              {"ratio", spec.ratio},
              {"sigma", spec.sigma},
              {"coords_per_instance", spec.coords_per_instance}};
}

DataSplit load_split(const DataConfig& d, const ModelSpec& model, std::uint64_t seed) {
  const auto data_seed = derive_seed(seed, "data");
  const auto test_seed = derive_seed(seed, "test");
  const auto dim = input_dim(model);
  const auto labels = label_spec_of(model);
  if (d.generator == "csv") {
    return {read_csv(d.train_path, labels), read_csv(d.test_path, labels)};
  }
  if (d.generator == "gaussian_binary") {
    return {gaussian_binary(d.n_train, dim, d.separation, data_seed, 0, d.prior),
            gaussian_binary(d.n_test, dim, d.separation, test_seed, d.n_train, d.prior)};
  }
  if (d.generator == "gaussian_multiclass") {
    return {gaussian_multiclass(d.n_train, dim, labels.classes, d.separation, data_seed, 0),
            gaussian_multiclass(d.n_test, dim, labels.classes, d.separation, test_seed,
                                d.n_train)};
  }
  const auto* net = std::get_if<LowRankAdapterNetSpec>(&model);
  if (net == nullptr) throw Error(ErrorCode::ConfigError, "teacher data needs an adapter_net model");
  const auto teacher_seed = derive_seed(seed, "teacher");
  return {teacher_dataset(*net, d.n_train, teacher_seed, data_seed, 0),
          teacher_dataset(*net, d.n_test, teacher_seed, test_seed, d.n_train)};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  constexpr std::string_view ctx = "experiment";
  require_known_keys(j,
                     {"data", "model", "train", "corruption", "task", "remove_ratio", "methods",
                      "solve_method", "solver", "force", "gradient_ascent", "seeds",
                      "format_version", "manifest_digest"},
                     ctx);
  ExperimentConfig cfg;
  if (j.contains("data")) cfg.data = data_config_from_json(j.at("data"));
  if (j.contains("model")) cfg.model = model_spec_from_json(j.at("model"));
  if (j.contains("train")) {
    cfg.train = train_config_from_json(j.at("train"), default_train_config(cfg.model));
  }
  if (j.contains("corruption") && !j.at("corruption").is_null()) {
    cfg.corruption = corruption_spec_from_json(j.at("corruption"));
  }
  cfg.task = get_or<std::string>(j, "task", cfg.task, ctx);
  if (cfg.task != "truth" && cfg.task != "IR") {
    throw Error(ErrorCode::ConfigError, "experiment: task must be 'truth' or 'IR'");
  }
  if (cfg.task == "truth" && !cfg.corruption) {
    throw Error(ErrorCode::ConfigError, "experiment: task 'truth' needs a corruption");
  }
  cfg.remove_ratio = get_or<double>(j, "remove_ratio", cfg.remove_ratio, ctx);
  if (j.contains("methods")) {
    cfg.methods = get_as<std::vector<std::string>>(j, "methods", ctx);
    for (const auto& m : cfg.methods) {
      if (m != "corrupted" && m != "retrain" && m != "eraser" && m != "eraser-cg" &&
          m != "eraser-lissa" && m != "eraser-dense" && m != "gradient_ascent") {
        throw Error(ErrorCode::ConfigError, fmt::format("experiment: unknown method '{}'", m));
      }
    }
  }
  if (j.contains("solve_method")) {
    cfg.solve_method = method_from_name(get_as<std::string>(j, "solve_method", ctx));
  }
  if (j.contains("solver")) cfg.solve = solve_config_from_json(j.at("solver"));
  cfg.force = get_or<bool>(j, "force", cfg.force, ctx);
  if (j.contains("gradient_ascent")) {
    const auto& g = j.at("gradient_ascent");
    require_known_keys(g, {"steps", "lr"}, "gradient_ascent");
    cfg.ga_steps = get_or<std::size_t>(g, "steps", cfg.ga_steps, "gradient_ascent");
    cfg.ga_lr = get_or<double>(g, "lr", cfg.ga_lr, "gradient_ascent");
  }
  if (j.contains("seeds")) {
    cfg.seeds.clear();
    for (const auto& s : j.at("seeds")) {
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
        throw Error(ErrorCode::ConfigError, "experiment: seeds must be non-negative integers");
      }
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json out{{"data", data_config_to_json(cfg.data)},
           {"model", model_spec_to_json(cfg.model)},
           {"train", train_config_to_json(cfg.train.value_or(default_train_config(cfg.model)))},
           {"task", cfg.task},
           {"remove_ratio", cfg.remove_ratio},
           {"methods", cfg.methods},
           {"solve_method", method_name(cfg.solve_method)},
           {"solver", solve_config_to_json(cfg.solve)},
           {"force", cfg.force},
           {"gradient_ascent", {{"steps", cfg.ga_steps}, {"lr", cfg.ga_lr}}},
           {"seeds", cfg.seeds}};
  if (cfg.corruption) {
    out["corruption"] = corruption_spec_to_json(*cfg.corruption);
  } else {
    out["corruption"] = nullptr;
  }
  return out;
}

namespace {

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return fmt::format("{}: {}", error_code_name(err->code()), err->what());
  }
  return fmt::format("error: {}", e.what());
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport report{cfg, {}, {}};
  for (const auto seed : cfg.seeds) {
    const auto fail_all = [&](const std::string& why) {
      for (const auto& m : cfg.methods) {
        CellResult cell;
        cell.method = m;
        cell.seed = seed;
        cell.error = why;
        report.cells.push_back(cell);
      }
    };

    std::optional<DataSplit> split;
    std::optional<Dataset> train_data;
    std::optional<UnlearnRequest> request;
    try {
      split = load_split(cfg.data, cfg.model, seed);
      if (cfg.corruption) {
        auto spec = *cfg.corruption;
        spec.seed = derive_seed(seed, "corrupt");
        auto c = corrupt(split->train, spec);
        train_data = c.corrupted;
        request = cfg.task == "IR" ? UnlearnRequest{InstanceRemoval{c.ids}} : c.truth;
      } else {
        train_data = split->train;
        CorruptionSpec pick{CorruptionKind::label_flip, cfg.remove_ratio, 1.0, 1,
                            derive_seed(seed, "remove")};
        request = InstanceRemoval{corrupt(split->train, pick).ids};
      }
    } catch (const std::exception& e) {
      fail_all(describe(e));
      continue;
    }

    auto train_cfg = cfg.train.value_or(default_train_config(cfg.model));
    train_cfg.seed = derive_seed(seed, "train");

    std::optional<TrainedModel> source;
    double source_seconds = 0.0;
    std::size_t source_peak = 0;
    std::optional<TrainedModel> reference;
    double reference_seconds = 0.0;
    std::size_t reference_peak = 0;
    try {
      audit::PeakScope scope;
      const auto start = Clock::now();
      source = train(cfg.model, *train_data, train_cfg);
      source_seconds = seconds_since(start);
      source_peak = scope.peak_floats();
    } catch (const std::exception& e) {
      fail_all(describe(e));
      continue;
    }
    std::string reference_error;
    try {
      audit::PeakScope scope;
      const auto start = Clock::now();
      reference = retrain_oracle(source->spec, *train_data, *request, train_cfg);
      reference_seconds = seconds_since(start);
      reference_peak = scope.peak_floats();
    } catch (const std::exception& e) {
      reference_error = describe(e);
    }

    for (const auto& method : cfg.methods) {
      CellResult cell;
      cell.method = method;
      cell.seed = seed;
      try {
        std::optional<TrainedModel> result;
        if (method == "corrupted") {
          result = source;
          cell.seconds = source_seconds;
          cell.peak_aux_floats = source_peak;
        } else if (method == "retrain") {
          if (!reference) throw Error(ErrorCode::TrainingDiverged, reference_error);
          result = reference;
          cell.seconds = reference_seconds;
          cell.peak_aux_floats = reference_peak;
        } else if (method == "gradient_ascent") {
          audit::PeakScope scope;
          const auto start = Clock::now();
          result = gradient_ascent_baseline(*source, *train_data, *request, cfg.ga_steps,
                                            cfg.ga_lr);
          cell.seconds = seconds_since(start);
          cell.peak_aux_floats = scope.peak_floats();
        } else {
          EraserOptions opts;
          opts.method = method == "eraser"         ? cfg.solve_method
                        : method == "eraser-cg"    ? SolveMethod::cg
                        : method == "eraser-lissa" ? SolveMethod::lissa
                                                   : SolveMethod::dense;
          opts.solve = cfg.solve;
          opts.solve.seed = derive_seed(seed, "solve");
          opts.force = cfg.force;
          const auto start = Clock::now();
          auto outcome = unlearn(*source, *train_data, *request, opts);
          cell.seconds = seconds_since(start);
          cell.peak_aux_floats = outcome.solve_report.peak_aux_floats;
          for (const auto& c : outcome.solve_report.trace) {
            report.series.push_back(SeriesPoint{method, seed, c.epoch, c.grad_norm});
          }
          result = std::move(outcome.new_model);
        }
        cell.metrics = evaluate(*result, split->test);
        cell.param_distance = reference ? distance(result->adapter, reference->adapter)
                                        : std::numeric_limits<double>::quiet_NaN();
      } catch (const std::exception& e) {
        cell.error = describe(e);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

json report_to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& c : report.cells) {
    json row{{"method", c.method}, {"seed", c.seed}};
    if (!c.error.empty()) {
      row["error"] = c.error;
    } else {
      row["accuracy"] = c.metrics.accuracy;
      row["mean_loss"] = c.metrics.mean_loss;
      if (c.metrics.auc) row["auc"] = *c.metrics.auc;
      if (c.metrics.macro_f1) row["macro_f1"] = *c.metrics.macro_f1;
      row["param_distance"] = c.param_distance;
      row["peak_aux_floats"] = c.peak_aux_floats;
    }
    rows.push_back(std::move(row));
  }
  return json{{"format_version", kFormatVersion},
              {"config", experiment_config_to_json(report.config)},
              {"seeds", report.config.seeds},
              {"rows", std::move(rows)}};
}

json timings_to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& c : report.cells) {
    rows.push_back(json{{"method", c.method}, {"seed", c.seed}, {"seconds", c.seconds}});
  }
  return json{{"format_version", kFormatVersion}, {"rows", std::move(rows)}};
}

std::string report_table(const ExperimentReport& report, bool with_seconds) {
  const auto metric = [](const CellResult& c) {
    if (c.metrics.auc) return fmt::format("{:.4f}", *c.metrics.auc);
    if (c.metrics.macro_f1) return fmt::format("{:.4f}", *c.metrics.macro_f1);
    return std::string("-");
  };
  std::string out = fmt::format("{:<16} {:>20} {:>9} {:>9} {:>12} {:>10}", "method", "seed",
                                "accuracy", "auc/f1", "dist_retrain", "peak_aux");
  out += with_seconds ? fmt::format(" {:>10}\n", "seconds") : "\n";
  for (const auto& c : report.cells) {
    if (!c.error.empty()) {
      out += fmt::format("{:<16} {:>20} {}\n", c.method, c.seed, c.error);
      continue;
    }
    out += fmt::format("{:<16} {:>20} {:>9.4f} {:>9} {:>12.4e} {:>10}", c.method, c.seed,
                       c.metrics.accuracy, metric(c), c.param_distance, c.peak_aux_floats);
    out += with_seconds ? fmt::format(" {:>10.4f}\n", c.seconds) : "\n";
  }
  return out;
}

void write_report(const std::filesystem::path& dir, const ExperimentReport& report,
                  const std::string& manifest_digest) {
  auto body = report_to_json(report);
  auto timings = timings_to_json(report);
  if (!manifest_digest.empty()) {
    body["manifest_digest"] = manifest_digest;
    timings["manifest_digest"] = manifest_digest;
  }
  write_text_file(dir / "report.json", dump_json(body));
  write_text_file(dir / "timings.json", dump_json(timings));
  std::string table = fmt::format("# format_version {}", kFormatVersion);
  if (!manifest_digest.empty()) table += fmt::format(" manifest_digest {}", manifest_digest);
  table += "\n";
  // Seconds vary between runs; they live in timings.json only.
  write_text_file(dir / "report.txt", table + report_table(report, false));
  std::string series = fmt::format("# format_version {}\nmethod,seed,epoch,grad_norm\n",
                                   kFormatVersion);
  for (const auto& s : report.series) {
    series += fmt::format("{},{},{},{:.17g}\n", s.method, s.seed, s.epoch, s.grad_norm);
  }
  write_text_file(dir / "series.csv", series);
}

}  // namespace unlearn
