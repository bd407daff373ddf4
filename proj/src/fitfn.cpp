// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/fitfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <tuple>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kagnn/affine.hpp"
#include "kagnn/errors.hpp"
#include "kagnn/fkan.hpp"
#include "kagnn/rng.hpp"
#include "kagnn/train.hpp"

namespace kagnn {
namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

struct TargetRow {
  FitTarget target;
  const char *name;
};

constexpr TargetRow kTargets[] = {
  { FitTarget::Logarithmic, "logarithmic" }, { FitTarget::SinPlusCos, "sin_plus_cos" },
  { FitTarget::Linear, "linear" },           { FitTarget::Sin, "sin" },
  { FitTarget::Polynomial, "polynomial" },   { FitTarget::Exponential, "exponential" },
  { FitTarget::Custom, "custom" },
};

double mse(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// A model the training loop can drive: predictions for a fixed input set,
// and a gradient of the MSE with respect to its parameters.
class Arm {
 public:
  virtual ~Arm() = default;
  virtual std::vector<double> predict_train() const = 0;
  virtual std::vector<double> predict(const std::vector<double> &x) const = 0;
  // Accumulates d(loss)/d(params) for upstream dL/dprediction into grad().
  virtual void backward(const std::vector<double> &upstream) = 0;
  virtual std::vector<ParamView> params() = 0;
  virtual std::vector<ParamView> grads() = 0;
  virtual void zero_grads() = 0;
  virtual void save() = 0;
  virtual void restore() = 0;
  virtual std::size_t parameter_count() const = 0;
};

Matrix column(const std::vector<double> &v) {
  return Matrix(v.size(), 1, v);
}

std::vector<double> flatten(const Matrix &m) { return m.data(); }

void zero_views(std::vector<ParamView> views) {
  for (auto &v : views)
    std::fill(v.values.begin(), v.values.end(), 0.0);
}

class KanArm final : public Arm {
 public:
  KanArm(const FitTask &task, const std::vector<double> &x_train, std::uint64_t seed)
      : task_(task),
        layer_(FourierKanLayer::init(1, 1, task.harmonics, seed, true)),
        grad_(layer_.zeros_like()),
        basis_(column(map_all(x_train)), task.harmonics) { }

  std::vector<double> predict_train() const override {
    return flatten(layer_.forward(basis_));
  }
  std::vector<double> predict(const std::vector<double> &x) const override {
    return flatten(layer_.forward(column(map_all(x))));
  }
  void backward(const std::vector<double> &upstream) override {
    layer_.backward_into(basis_, column(upstream), grad_, false);
  }
  std::vector<ParamView> params() override {
    std::vector<ParamView> out;
    layer_.append_parameters("kan", out);
    return out;
  }
  std::vector<ParamView> grads() override {
    std::vector<ParamView> out;
    grad_.append_parameters("kan", out);
    return out;
  }
  void zero_grads() override { zero_views(grads()); }
  void save() override { best_ = layer_; }
  void restore() override { layer_ = best_; }
  std::size_t parameter_count() const override { return layer_.parameter_count(); }

 private:
  std::vector<double> map_all(std::vector<double> x) const {
    if (task_.input_map == InputMap::HalfPeriod)
      for (auto &v : x)
        v = kPi * (v - task_.lo) / (task_.hi - task_.lo);
    return x;
  }

  FitTask task_;
  FourierKanLayer layer_;
  FourierKanLayer grad_;
  FourierKanLayer best_;
  FourierBasis basis_;
};

// 1 -> hidden -> 1 with tanh; inputs are scaled to [-1, 1].
class MlpArm final : public Arm {
 public:
  MlpArm(const FitTask &task, const std::vector<double> &x_train, std::uint64_t seed)
      : task_(task), x_(column(scale_all(x_train))) {
    Rng rng(seed);
    hidden_ = AffineMap::init(1, task.mlp_hidden, rng);
    output_ = AffineMap::init(task.mlp_hidden, 1, rng);
    hidden_grad_ = hidden_.zeros_like();
    output_grad_ = output_.zeros_like();
  }

  std::vector<double> predict_train() const override {
    activations_ = activate(x_);
    return flatten(output_.forward(activations_));
  }
  std::vector<double> predict(const std::vector<double> &x) const override {
    return flatten(output_.forward(activate(column(scale_all(x)))));
  }
  // Uses the activations cached by the preceding predict_train().
  void backward(const std::vector<double> &upstream) override {
    Matrix d_act = output_.backward_into(activations_, column(upstream), output_grad_);
    for (std::size_t b = 0; b < d_act.rows(); ++b)
      for (std::size_t j = 0; j < d_act.cols(); ++j)
        d_act(b, j) *= 1.0 - activations_(b, j) * activations_(b, j);
    hidden_.backward_into(x_, d_act, hidden_grad_, false);
  }
  std::vector<ParamView> params() override {
    std::vector<ParamView> out;
    hidden_.append_parameters("hidden", out);
    output_.append_parameters("output", out);
    return out;
  }
  std::vector<ParamView> grads() override {
    std::vector<ParamView> out;
    hidden_grad_.append_parameters("hidden", out);
    output_grad_.append_parameters("output", out);
    return out;
  }
  void zero_grads() override { zero_views(grads()); }
  void save() override { best_ = { hidden_, output_ }; }
  void restore() override { std::tie(hidden_, output_) = best_; }
  std::size_t parameter_count() const override {
    return hidden_.parameter_count() + output_.parameter_count();
  }

 private:
  std::vector<double> scale_all(std::vector<double> x) const {
    for (auto &v : x)
      v = 2.0 * (v - task_.lo) / (task_.hi - task_.lo) - 1.0;
    return x;
  }
  Matrix activate(const Matrix &x) const {
    Matrix a = hidden_.forward(x);
    for (auto &v : a.data())
      v = std::tanh(v);
    return a;
  }

  FitTask task_;
  Matrix x_;
  AffineMap hidden_, output_, hidden_grad_, output_grad_;
  std::pair<AffineMap, AffineMap> best_;
  mutable Matrix activations_;
};

std::vector<double> train_points(const FitTask &task) {
  std::vector<double> x(task.n_samples);
  const double step = (task.hi - task.lo) / static_cast<double>(task.n_samples);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = task.lo + (static_cast<double>(i) + 0.5) * step;
  return x;
}

std::vector<double> test_points(const FitTask &task) {
  std::vector<double> x(task.n_test);
  const double step = (task.hi - task.lo) / static_cast<double>(task.n_test - 1);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = task.lo + static_cast<double>(i) * step;
  x.back() = task.hi;
  return x;
}

}  // namespace

std::string_view to_string(FitTarget target) {
  for (const auto &row : kTargets)
    if (row.target == target)
      return row.name;
  return "unknown";
}

std::optional<FitTarget> parse_fit_target(std::string_view name) {
  for (const auto &row : kTargets)
    if (name == row.name && row.target != FitTarget::Custom)
      return row.target;
  return std::nullopt;
}

const std::vector<FitTarget> &standard_targets() {
  static const std::vector<FitTarget> targets = {
    FitTarget::Logarithmic, FitTarget::SinPlusCos,  FitTarget::Linear,
    FitTarget::Sin,         FitTarget::Polynomial, FitTarget::Exponential,
  };
  return targets;
}

std::string_view to_string(FitArm arm) {
  return arm == FitArm::FourierKan ? "kan" : "mlp";
}

std::optional<FitArm> parse_fit_arm(std::string_view name) {
  if (name == "kan")
    return FitArm::FourierKan;
  if (name == "mlp")
    return FitArm::Mlp;
  return std::nullopt;
}

std::string_view to_string(InputMap map) {
  return map == InputMap::Raw ? "raw" : "half_period";
}

void FitTask::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw std::invalid_argument("fit domain must be a finite interval with lo < hi");
  if (target == FitTarget::Logarithmic && lo <= 0.0)
    throw std::invalid_argument("logarithmic target needs a strictly positive domain");
  if (target == FitTarget::Custom && !custom)
    throw std::invalid_argument("custom target has no function");
  if (n_samples < 16)
    throw std::invalid_argument("n_samples must be at least 16");
  if (n_test < 2)
    throw std::invalid_argument("n_test must be at least 2");
  if (harmonics == 0 || mlp_hidden == 0)
    throw std::invalid_argument("K and mlp_hidden must be positive");
  if (!(noise_std >= 0.0))
    throw std::invalid_argument("noise_std must be non-negative");
  if (!(learning_rate > 0.0) || plateau_window == 0)
    throw std::invalid_argument("learning rate and plateau window must be positive");
}

double FitTask::evaluate(double x) const {
  switch (target) {
  case FitTarget::Logarithmic: return std::log(x);
  case FitTarget::SinPlusCos: return std::sin(2.0 * x) + std::cos(3.0 * x);
  case FitTarget::Linear: return 2.0 * x - 1.0;
  case FitTarget::Sin: return std::sin(x);
  case FitTarget::Polynomial: return x * x * x - 2.0 * x * x + x;
  case FitTarget::Exponential: return std::exp(x);
  case FitTarget::Custom: return custom(x);
  }
  return 0.0;
}

std::string FitTask::name() const {
  return target == FitTarget::Custom ? custom_name : std::string(to_string(target));
}

FitTask default_task(FitTarget target) {
  FitTask t;
  t.target = target;
  switch (target) {
  case FitTarget::Logarithmic:
    t.lo = 0.1, t.hi = 4.0, t.harmonics = 100, t.input_map = InputMap::HalfPeriod;
    break;
  case FitTarget::SinPlusCos:
    t.lo = 0.0, t.hi = 2.0 * kPi, t.harmonics = 10;
    break;
  case FitTarget::Linear:
    t.lo = 0.0, t.hi = 2.0 * kPi, t.harmonics = 200, t.input_map = InputMap::HalfPeriod;
    break;
  case FitTarget::Sin:
    t.lo = 0.0, t.hi = 2.0 * kPi, t.harmonics = 10;
    break;
  case FitTarget::Polynomial:
    t.lo = -2.0, t.hi = 2.0, t.harmonics = 500, t.input_map = InputMap::HalfPeriod;
    t.n_samples = 2048;
    break;
  case FitTarget::Exponential:
    t.lo = 0.0, t.hi = 2.0, t.harmonics = 120, t.input_map = InputMap::HalfPeriod;
    break;
  case FitTarget::Custom:
    t.lo = 0.0, t.hi = 2.0 * kPi;
    break;
  }
  // Keep the sample grid comfortably denser than the number of harmonics.
  t.n_samples = std::max(t.n_samples, 4 * t.harmonics);
  return t;
}

FitResult run_fit(const FitTask &task, FitArm arm, std::uint64_t seed) {
  task.validate();
  const auto x_train = train_points(task);
  std::vector<double> y_train(x_train.size());
  Rng noise(mix_seed(seed, 0xf17));
  for (std::size_t i = 0; i < x_train.size(); ++i) {
    y_train[i] = task.evaluate(x_train[i]);
    if (task.noise_std > 0.0)
      y_train[i] += noise.normal(0.0, task.noise_std);
  }

  std::unique_ptr<Arm> model;
  if (arm == FitArm::FourierKan)
    model = std::make_unique<KanArm>(task, x_train, seed);
  else
    model = std::make_unique<MlpArm>(task, x_train, seed);

  const double n = static_cast<double>(x_train.size());
  AdamState adam;
  double lr = task.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  double window_best = best;
  std::size_t steps_run = 0;
  std::vector<double> upstream(x_train.size());
  for (std::size_t step = 0; step < task.steps; ++step) {
    const auto pred = model->predict_train();
    const double loss = mse(pred, y_train);
    if (!std::isfinite(loss))
      throw NumericError("fit diverged at step " + std::to_string(step) +
                         " (lr " + std::to_string(lr) + ")");
    if (loss < best) {
      best = loss;
      model->save();
    }
    if (loss == 0.0)
      break;
    if ((step + 1) % task.plateau_window == 0) {
      if (!(best < window_best * (1.0 - task.plateau_tolerance)))
        lr = std::max(lr * 0.5, task.min_learning_rate);
      window_best = best;
    }
    for (std::size_t i = 0; i < pred.size(); ++i)
      upstream[i] = 2.0 * (pred[i] - y_train[i]) / n;
    model->zero_grads();
    model->backward(upstream);
    auto params = model->params();
    adam_step(params, model->grads(), adam, lr);
    steps_run = step + 1;
  }
  // Score the final iterate too before settling on the best one seen.
  if (mse(model->predict_train(), y_train) < best)
    model->save();
  model->restore();

  FitResult result;
  result.target = task.name();
  result.arm = arm;
  result.seed = seed;
  if (arm == FitArm::FourierKan)
    result.harmonics = task.harmonics;
  else
    result.hidden = task.mlp_hidden;
  result.train_mse = mse(model->predict_train(), y_train);
  result.x = test_points(task);
  for (double x : result.x)
    result.y_true.push_back(task.evaluate(x));
  result.y_pred = model->predict(result.x);
  result.test_mse = mse(result.y_pred, result.y_true);
  result.parameter_count = model->parameter_count();
  result.steps_run = steps_run;
  return result;
}

std::vector<FitResult> sweep_k(const FitTask &task, const std::vector<std::size_t> &k_list,
                               std::uint64_t seed) {
  if (k_list.empty())
    throw std::invalid_argument("sweep_k needs at least one K");
  std::vector<FitResult> results;
  for (auto k : k_list) {
    FitTask t = task;
    t.harmonics = k;
    results.push_back(run_fit(t, FitArm::FourierKan, seed));
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const FitResult &a, const FitResult &b) { return a.harmonics < b.harmonics; });
  return results;
}

json FitResult::to_json() const {
  return { { "target", target },
           { "arm", to_string(arm) },
           { "K", harmonics },
           { "hidden", hidden },
           { "seed", seed },
           { "train_mse", train_mse },
           { "test_mse", test_mse },
           { "parameter_count", parameter_count },
           { "steps_run", steps_run },
           { "x", x },
           { "y_true", y_true },
           { "y_pred", y_pred } };
}

FitResult FitResult::from_json(const json &doc) {
  FitResult r;
  try {
    r.target = doc.at("target").get<std::string>();
    const auto arm = parse_fit_arm(doc.at("arm").get<std::string>());
    if (!arm)
      throw ParseError("fit result has an unknown arm");
    r.arm = *arm;
    r.harmonics = doc.at("K").get<std::size_t>();
    r.hidden = doc.at("hidden").get<std::size_t>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.train_mse = doc.at("train_mse").get<double>();
    r.test_mse = doc.at("test_mse").get<double>();
    r.parameter_count = doc.at("parameter_count").get<std::size_t>();
    r.steps_run = doc.at("steps_run").get<std::size_t>();
    r.x = doc.at("x").get<std::vector<double>>();
    r.y_true = doc.at("y_true").get<std::vector<double>>();
    r.y_pred = doc.at("y_pred").get<std::vector<double>>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("invalid fit result: ") + e.what());
  }
  return r;
}

std::string FitResult::predictions_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "x,target,prediction\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << x[i] << ',' << y_true[i] << ',' << y_pred[i] << '\n';
  return out.str();
}

}  // namespace kagnn
