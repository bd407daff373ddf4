// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kagnn/graph.hpp"
#include "kagnn/model.hpp"
#include "kagnn/tensor.hpp"

namespace kagnn {

// ---------------------------------------------------------------------------
// Adam

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update. Throws NumericError, leaving parameters
/// and state untouched, if any gradient entry is non-finite.
void adam_step(std::vector<ParamView> &params,
               const std::vector<ParamView> &grads, AdamState &state,
               double learning_rate, const AdamOptions &options = {});

// ---------------------------------------------------------------------------
// Splits

enum class SplitProvenance { RandomSeeded, ExternalFile };

struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
  SplitProvenance provenance = SplitProvenance::RandomSeeded;

  /// Disjoint lists whose union is exactly {0, ..., n-1}.
  void validate(std::size_t n) const;
  nlohmann::json to_json() const;
};

std::string_view to_string(SplitProvenance provenance);

/// Seeded shuffle, then sizes floor(r0 n) / floor(r1 n) / remainder.
SplitSpec random_split(std::size_t n, std::uint64_t seed,
                       double train_ratio = 0.8, double valid_ratio = 0.1);

/// {"train": [...], "valid": [...], "test": [...]}, validated against n.
SplitSpec split_from_json(const nlohmann::json &doc, std::size_t n);

// ---------------------------------------------------------------------------
// Metrics

/// Mann-Whitney U / (n_pos n_neg); tied scores count 1/2. Throws
/// EvaluationError when either class is absent.
double roc_auc(const std::vector<double> &scores, const std::vector<int> &labels);

struct MacroAuc {
  double mean = 0.0;
  std::vector<std::optional<double>> per_task;  // nullopt: task skipped
  std::size_t evaluated_tasks = 0;
};

/// scores/labels/mask are [sample][task]. Tasks with a single class among
/// unmasked labels are skipped; if all are skipped, EvaluationError.
MacroAuc macro_roc_auc(const std::vector<std::vector<double>> &scores,
                       const std::vector<std::vector<double>> &labels,
                       const std::vector<std::vector<std::uint8_t>> &mask);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  std::size_t harmonics = 2;
  std::size_t n_layers = 1;
  double cutoff = kDefaultCutoff;
  std::size_t epochs = 1000;
  std::uint64_t seed = 0;
  Variant variant = Variant::KaGnn;
  AdamOptions adam;
  std::size_t patience = 50;
  std::size_t hidden_dim = 64;
  std::size_t readout_layers = 0;
  bool kan_bias = false;
  std::size_t threads = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  ModelConfig model_config(std::size_t n_tasks) const;

  nlohmann::json to_json() const;
  /// Fields absent from `doc` keep the values already in `base`.
  static TrainConfig from_json(const nlohmann::json &doc, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json &doc);
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean BCE per labeled (sample, task) entry
  std::optional<double> valid_auc;
  double valid_loss = 0.0;
};

struct RunReport {
  TrainConfig config;
  SplitProvenance split_provenance = SplitProvenance::RandomSeeded;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_test = 0;
  std::size_t parameter_count = 0;
  std::size_t covalent_edges = 0;
  std::size_t cutoff_edges = 0;
  std::string selection_metric;  // "valid_auc" or "valid_loss"
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0: the untrained model
  std::optional<double> best_valid_auc;
  double test_auc = 0.0;
  std::vector<std::optional<double>> test_task_auc;
  double wall_seconds = 0.0;  // kept out of to_json()

  nlohmann::json to_json() const;
  std::string epochs_csv() const;
};

struct TrainResult {
  RunReport report;
  Model model;  // weights at the best validation epoch
};

struct Evaluation {
  MacroAuc auc;
  double mean_loss = 0.0;
  std::vector<std::vector<double>> probabilities;
};

/// Throws EvaluationError when no task in `indices` has both classes.
Evaluation evaluate(const Model &model, const std::vector<MolecularGraph> &data,
                    const std::vector<std::size_t> &indices);

/// Mean BCE over labeled (sample, task) entries.
double mean_loss(const Model &model, const std::vector<MolecularGraph> &data,
                 const std::vector<std::size_t> &indices);

/// Minibatch Adam with per-epoch seeded shuffling, best-validation model
/// selection and early stopping after `patience` epochs without improvement.
/// The test set is evaluated once, with the selected weights.
TrainResult train_loop(const std::vector<MolecularGraph> &data,
                       const TrainConfig &config, const SplitSpec &split);

struct RepeatedRuns {
  std::vector<RunReport> runs;
  double test_auc_mean = 0.0;
  double test_auc_std = 0.0;  // population standard deviation
  nlohmann::json to_json() const;
};

RepeatedRuns aggregate_runs(std::vector<RunReport> runs);

}  // namespace kagnn
