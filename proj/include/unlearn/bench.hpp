// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unlearn/dataset.hpp"
#include "unlearn/json_io.hpp"
#include "unlearn/models.hpp"
#include "unlearn/solver.hpp"
#include "unlearn/tasks.hpp"

namespace unlearn {

/// Child seed for a fixed component label, e.g. derive_seed(root, "data").
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// ---- data ----------------------------------------------------------------

/// y ~ Bernoulli(prior), x ~ N(0, I) with x[0] shifted by +-separation.
/// Ids run from first_id.
Dataset gaussian_binary(std::size_t n, std::size_t d, double separation, std::uint64_t seed,
                        InstanceId first_id = 0, double prior = 0.5);

/// Uniform class k, x ~ N(separation * e_{k mod d}, I).
Dataset gaussian_multiclass(std::size_t n, std::size_t d, int classes, double separation,
                            std::uint64_t seed, InstanceId first_id = 0);

/// x ~ N(0, I) labelled by argmax of a teacher that shares the spec's frozen
/// backbone and has its own rank-r adapter and head drawn from teacher_seed.
Dataset teacher_dataset(const LowRankAdapterNetSpec& spec, std::size_t n,
                        std::uint64_t teacher_seed, std::uint64_t seed, InstanceId first_id = 0);

/// Header row, optional leading `id` column (else ids are row indices),
/// columns f0..f{d-1}, then `label`.
Dataset read_csv(const std::filesystem::path& path, const LabelSpec& labels);
void write_csv(const std::filesystem::path& path, const Dataset& data);

// ---- corruption ----------------------------------------------------------

enum class CorruptionKind { label_flip, label_randomize, feature_noise, feature_zero };

std::string_view corruption_name(CorruptionKind kind);
CorruptionKind corruption_from_name(std::string_view name);

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::label_flip;
  double ratio = 0.1;  // in (0, 0.5]
  double sigma = 1.0;  // feature_noise
  std::size_t coords_per_instance = 1;  // feature_zero
  std::uint64_t seed = 0;
};

struct Corruption {
  Dataset corrupted;
  UnlearnRequest truth;  // restores the clean values, targets sorted by id
  std::vector<InstanceId> ids;
};

/// Corrupts round(ratio * n) instances chosen by the seed. Label flips map
/// binary y to 1 - y, class y to (y + 1) mod C and real y to -y; label
/// randomization draws a different label uniformly.
/// Throws NothingToCorrupt when ratio * n < 1.
Corruption corrupt(const Dataset& data, const CorruptionSpec& spec);

// ---- metrics -------------------------------------------------------------

double accuracy(std::span<const int> predicted, std::span<const int> truth);
/// Mann-Whitney AUC with average ranks for ties; `positive` marks label 1.
double roc_auc(std::span<const double> scores, std::span<const int> truth);
double macro_f1(std::span<const int> predicted, std::span<const int> truth, int classes);

struct Metrics {
  double accuracy = 0.0;
  std::optional<double> auc;       // binary
  std::optional<double> macro_f1;  // multiclass
  double mean_loss = 0.0;
};

Metrics evaluate(const TrainedModel& trained, const Dataset& test);

// ---- baselines -----------------------------------------------------------

/// Trains from the original initialization and seed on the edited data. The
/// spec keeps its bound reg_count so the per-instance objective is unchanged.
TrainedModel retrain_oracle(const ModelSpec& spec, const Dataset& data, const UnlearnRequest& req,
                            const TrainConfig& cfg);

/// `steps` ascent steps theta += lr * sum_{z in S} grad L(z; theta) on the
/// removed instances. Throws BaselineDiverged on a non-finite adapter.
TrainedModel gradient_ascent_baseline(const TrainedModel& trained, const Dataset& data,
                                      const UnlearnRequest& req, std::size_t steps, double lr);

// ---- experiments ---------------------------------------------------------

struct DataConfig {
  std::string generator = "gaussian_binary";  // gaussian_multiclass, teacher, csv
  std::size_t n_train = 2000;
  std::size_t n_test = 2000;
  double separation = 1.5;
  double prior = 0.5;
  std::string train_path;  // csv
  std::string test_path;   // csv
};

struct DataSplit {
  Dataset train;
  Dataset test;
};

/// Generates (seeds derived from root_seed with labels "data", "test" and
/// "teacher") or loads the train/test split. Test ids follow the train ids.
DataSplit load_split(const DataConfig& data, const ModelSpec& model, std::uint64_t root_seed);

DataConfig data_config_from_json(const json& j);
json data_config_to_json(const DataConfig& cfg);
/// Seed is not part of the JSON form; callers derive it.
CorruptionSpec corruption_spec_from_json(const json& j);
json corruption_spec_to_json(const CorruptionSpec& spec);

/// Method names: corrupted (the model trained on corrupted data), retrain,
/// eraser (uses solve_method), eraser-cg, eraser-lissa, eraser-dense,
/// gradient_ascent.
struct ExperimentConfig {
  DataConfig data;
  ModelSpec model = LogisticRegressionSpec{20, 1.0, 0};
  std::optional<TrainConfig> train;  // defaults per model family
  std::optional<CorruptionSpec> corruption;  // seed is derived per run
  std::string task = "truth";  // "truth" undoes the corruption, "IR" removes
  double remove_ratio = 0.05;  // IR without corruption: random removal
  std::vector<std::string> methods{"corrupted", "eraser", "retrain"};
  SolveMethod solve_method = SolveMethod::minibatch;
  SolveConfig solve;
  bool force = false;
  std::size_t ga_steps = 1;
  double ga_lr = 0.01;
  std::vector<std::uint64_t> seeds{0};
};

ExperimentConfig experiment_config_from_json(const json& j);
json experiment_config_to_json(const ExperimentConfig& cfg);

struct CellResult {
  std::string method;
  std::uint64_t seed = 0;
  std::string error;  // empty on success, else "<code>: <message>"
  Metrics metrics;
  double param_distance = 0.0;  // ||theta_method - theta_retrain||_2
  double seconds = 0.0;
  std::size_t peak_aux_floats = 0;
};

struct SeriesPoint {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double grad_norm = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellResult> cells;  // (seed, method) in config order
  std::vector<SeriesPoint> series;
};

/// Per seed: generate or load, corrupt, train on corrupted data, retrain
/// reference, then each method. Stage failures land in the cell's error.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Timing-free JSON, byte-stable for equal configs.
json report_to_json(const ExperimentReport& report);
json timings_to_json(const ExperimentReport& report);
/// Fixed-width text table.
std::string report_table(const ExperimentReport& report, bool with_seconds = true);
/// Writes report.json, report.txt, timings.json and series.csv.
void write_report(const std::filesystem::path& dir, const ExperimentReport& report,
                  const std::string& manifest_digest = {});

}  // namespace unlearn
