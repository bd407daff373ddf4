// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

//! Univariate fitting harness: a one-layer Fourier KAN against a
//! one-hidden-layer MLP on a handful of fixed target functions.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace kagnn {

enum class FitTarget {
  Logarithmic,  // ln x on [0.1, 4]
  SinPlusCos,   // sin 2x + cos 3x on [0, 2pi]
  Linear,       // 2x - 1 on [0, 2pi]
  Sin,          // sin x on [0, 2pi]
  Polynomial,   // x^3 - 2x^2 + x on [-2, 2]
  Exponential,  // e^x on [0, 2]
  Custom,       // FitTask::custom
};

std::string_view to_string(FitTarget target);
std::optional<FitTarget> parse_fit_target(std::string_view name);

/// The six named targets in a fixed order.
const std::vector<FitTarget> &standard_targets();

enum class FitArm { FourierKan, Mlp };

std::string_view to_string(FitArm arm);
std::optional<FitArm> parse_fit_arm(std::string_view name);

// How the KAN arm sees x. `Raw` feeds x unchanged, so targets built from
// sin(kx), cos(kx) stay inside the hypothesis class. `HalfPeriod` maps the
// domain affinely onto [0, pi]; the cosine terms then form a complete basis
// for the interval with no wrap-around jump between its ends.
enum class InputMap { Raw, HalfPeriod };

std::string_view to_string(InputMap map);

struct FitTask {
  FitTarget target = FitTarget::Sin;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n_samples = 256;
  std::size_t n_test = 1000;
  std::size_t harmonics = 10;
  std::size_t mlp_hidden = 64;
  double noise_std = 0.0;
  InputMap input_map = InputMap::Raw;

  std::size_t steps = 5000;
  double learning_rate = 1e-2;
  // The step size halves whenever the best loss fails to drop by
  // `plateau_tolerance` (relative) over `plateau_window` steps.
  std::size_t plateau_window = 200;
  double plateau_tolerance = 1e-2;
  double min_learning_rate = 1e-6;

  std::function<double(double)> custom;  // only for FitTarget::Custom
  std::string custom_name = "custom";

  /// Throws std::invalid_argument on a bad domain or sample count.
  void validate() const;
  double evaluate(double x) const;
  std::string name() const;
};

/// Domain, K and input map used for the named targets.
FitTask default_task(FitTarget target);

struct FitResult {
  std::string target;
  FitArm arm = FitArm::FourierKan;
  std::size_t harmonics = 0;  // KAN arm
  std::size_t hidden = 0;     // MLP arm
  std::uint64_t seed = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::size_t parameter_count = 0;
  std::size_t steps_run = 0;
  // Dense test grid.
  std::vector<double> x;
  std::vector<double> y_true;
  std::vector<double> y_pred;

  nlohmann::json to_json() const;
  static FitResult from_json(const nlohmann::json &doc);
  /// x,target,prediction rows with a header line.
  std::string predictions_csv() const;

  friend bool operator==(const FitResult &, const FitResult &) = default;
};

/// Full-batch Adam on `task.n_samples` evenly spaced points. Throws
/// NumericError naming the step on divergence.
FitResult run_fit(const FitTask &task, FitArm arm, std::uint64_t seed);

/// One KAN-arm run per K (in list order, sharing samples and seed),
/// returned sorted by K. Throws std::invalid_argument on an empty list.
std::vector<FitResult> sweep_k(const FitTask &task,
                               const std::vector<std::size_t> &k_list,
                               std::uint64_t seed);

}  // namespace kagnn
