// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "kagnn/fitfn.hpp"

namespace kagnn {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

FitTask custom_task(std::function<double(double)> f, std::size_t k) {
  FitTask task;
  task.target = FitTarget::Custom;
  task.custom = std::move(f);
  task.lo = 0.0;
  task.hi = kTwoPi;
  task.harmonics = k;
  return task;
}

TEST(FitTaskTest, DefaultTargets) {
  EXPECT_EQ(default_task(FitTarget::Logarithmic).harmonics, 100u);
  EXPECT_EQ(default_task(FitTarget::SinPlusCos).harmonics, 10u);
  EXPECT_EQ(default_task(FitTarget::Linear).harmonics, 200u);
  EXPECT_EQ(default_task(FitTarget::Sin).harmonics, 10u);
  EXPECT_EQ(default_task(FitTarget::Polynomial).harmonics, 500u);
  EXPECT_EQ(default_task(FitTarget::Exponential).harmonics, 120u);
  const auto log_task = default_task(FitTarget::Logarithmic);
  EXPECT_EQ(log_task.lo, 0.1);
  EXPECT_EQ(log_task.hi, 4.0);
  EXPECT_DOUBLE_EQ(log_task.evaluate(1.0), 0.0);
  EXPECT_DOUBLE_EQ(default_task(FitTarget::Polynomial).evaluate(2.0), 2.0);
  EXPECT_DOUBLE_EQ(default_task(FitTarget::SinPlusCos).evaluate(0.0), 1.0);
  EXPECT_DOUBLE_EQ(default_task(FitTarget::Linear).evaluate(1.0), 1.0);
  EXPECT_EQ(standard_targets().size(), 6u);
  for (auto t : standard_targets())
    EXPECT_EQ(parse_fit_target(to_string(t)), t);
}

TEST(FitTaskTest, Validation) {
  auto task = default_task(FitTarget::Logarithmic);
  task.lo = 0.0;
  EXPECT_THROW(task.validate(), std::invalid_argument);
  task = default_task(FitTarget::Sin);
  task.n_samples = 15;
  EXPECT_THROW(task.validate(), std::invalid_argument);
  task = default_task(FitTarget::Sin);
  task.hi = task.lo;
  EXPECT_THROW(run_fit(task, FitArm::FourierKan, 0), std::invalid_argument);
  EXPECT_THROW(custom_task(nullptr, 1).validate(), std::invalid_argument);
}

TEST(RunFit, ZeroTargetIsFitExactly) {
  auto task = custom_task([](double) { return 0.0; }, 4);
  const auto r = run_fit(task, FitArm::FourierKan, 1);
  EXPECT_LT(r.test_mse, 1e-10);
  EXPECT_LT(r.train_mse, 1e-10);
}

TEST(RunFit, InClassTargetsAreRecovered) {
  for (std::size_t k0 = 1; k0 <= 3; ++k0) {
    for (std::size_t k : { k0, std::size_t { 5 } }) {
      auto task = custom_task([k0](double x) { return std::sin(k0 * x) + std::cos(k0 * x); }, k);
      const auto r = run_fit(task, FitArm::FourierKan, 2);
      EXPECT_LT(r.test_mse, 1e-6) << "k0=" << k0 << " K=" << k;
    }
  }
}

TEST(RunFit, SineTarget) {
  const auto r = run_fit(default_task(FitTarget::Sin), FitArm::FourierKan, 1);
  EXPECT_LT(r.test_mse, 1e-3);
  EXPECT_EQ(r.parameter_count, 2u * 10 + 1);
  EXPECT_EQ(r.x.size(), 1000u);
  EXPECT_EQ(r.x.front(), 0.0);
  EXPECT_EQ(r.x.back(), kTwoPi);
  EXPECT_GE(r.train_mse, 0.0);
}

TEST(RunFit, LinearTarget) {
  const auto r = run_fit(default_task(FitTarget::Linear), FitArm::FourierKan, 1);
  EXPECT_LT(r.test_mse, 1e-2);
}

TEST(RunFit, MlpBaseline) {
  const auto r = run_fit(default_task(FitTarget::Sin), FitArm::Mlp, 1);
  EXPECT_EQ(r.parameter_count, 64u * 3 + 1);
  EXPECT_EQ(r.hidden, 64u);
  EXPECT_LT(r.test_mse, 1e-2);
}

TEST(RunFit, HarmonicsNeverHurtInClass) {
  // Best of three seeds on sin x for growing K; the hypothesis class only
  // grows, so the best MSE may not get worse beyond optimization slack.
  auto task = default_task(FitTarget::Sin);
  task.steps = 2000;
  std::vector<double> best;
  for (std::size_t k : { 1, 2, 4, 8 }) {
    task.harmonics = k;
    double b = INFINITY;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
      b = std::min(b, run_fit(task, FitArm::FourierKan, seed).test_mse);
    best.push_back(b);
  }
  for (std::size_t i = 0; i + 1 < best.size(); ++i)
    for (std::size_t j = i + 1; j < best.size(); ++j)
      EXPECT_GE(best[i], best[j] - 1e-6) << i << " vs " << j;
}

TEST(RunFit, Deterministic) {
  auto task = default_task(FitTarget::Exponential);
  task.steps = 300;
  EXPECT_EQ(run_fit(task, FitArm::FourierKan, 9), run_fit(task, FitArm::FourierKan, 9));
  EXPECT_EQ(run_fit(task, FitArm::Mlp, 9), run_fit(task, FitArm::Mlp, 9));
}

TEST(FitResultTest, JsonRoundTripBothArms) {
  auto task = default_task(FitTarget::Polynomial);
  task.harmonics = 7;
  task.steps = 200;
  task.n_test = 50;
  for (auto arm : { FitArm::FourierKan, FitArm::Mlp }) {
    const auto r = run_fit(task, arm, 3);
    EXPECT_EQ(FitResult::from_json(r.to_json()), r);
    EXPECT_EQ(FitResult::from_json(nlohmann::json::parse(r.to_json().dump())), r);
  }
}

TEST(FitResultTest, PredictionsCsv) {
  auto task = default_task(FitTarget::Sin);
  task.steps = 10;
  task.n_test = 20;
  const auto csv = run_fit(task, FitArm::FourierKan, 0).predictions_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,target,prediction");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

TEST(SweepK, SingleVersusRepeated) {
  auto task = default_task(FitTarget::Polynomial);
  task.steps = 300;
  const auto one = sweep_k(task, { 1 }, 4);
  const auto two = sweep_k(task, { 1, 1 }, 4);
  ASSERT_EQ(one.size(), 1u);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(one[0], two[0]);
  EXPECT_EQ(two[0], two[1]);
}

TEST(SweepK, SortedByK) {
  auto task = default_task(FitTarget::Polynomial);
  task.steps = 100;
  const auto r = sweep_k(task, { 9, 2, 5 }, 0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].harmonics, 2u);
  EXPECT_EQ(r[1].harmonics, 5u);
  EXPECT_EQ(r[2].harmonics, 9u);
  EXPECT_EQ(r[1], run_fit([&] { auto t = task; t.harmonics = 5; return t; }(),
                          FitArm::FourierKan, 0));
}

TEST(SweepK, EmptyListRejected) {
  EXPECT_THROW(sweep_k(default_task(FitTarget::Polynomial), {}, 0), std::invalid_argument);
}

}  // namespace
}  // namespace kagnn
