// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kagnn/rng.hpp"
#include "kagnn/synthetic.hpp"

namespace kagnn {
namespace {

double weighted_sum(const Matrix &out, const Matrix &upstream) {
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i)
    total += out.data()[i] * upstream.data()[i];
  return total;
}

// Fourth-order central difference of `loss` with respect to `value`
// (restored afterwards). Truncation error is O(step^4), so it stays well
// below roundoff at the steps used here.
template <class Loss>
double central_difference(double &value, double step, Loss &&loss) {
  const double saved = value;
  auto at = [&](double offset) {
    value = saved + offset;
    return loss();
  };
  const double d = 8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step));
  value = saved;
  return d / (12.0 * step);
}

template <class Loss>
GradCheckGroup compare(const std::string &name, std::vector<double> &values,
                       const std::vector<double> &analytic, double step,
                       Loss &&loss) {
  GradCheckGroup group { name, values.size(), 0.0 };
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double numeric = central_difference(values[i], step, loss);
    group.max_relative_error = std::max(
        group.max_relative_error, gradient_relative_error(analytic[i], numeric));
  }
  return group;
}

}  // namespace

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({ std::abs(analytic), std::abs(numeric), floor });
  return std::abs(analytic - numeric) / denom;
}

double GradCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto &g : groups)
    worst = std::max(worst, g.max_relative_error);
  return worst;
}

GradCheckReport check_layer_gradients(const FourierKanLayer &layer,
                                      const Matrix &x, const Matrix &upstream,
                                      double step) {
  const LayerGradients analytic = layer.backward(x, upstream);
  FourierKanLayer probe = layer;
  Matrix input = x;
  auto loss = [&]() { return weighted_sum(probe.forward(input), upstream); };

  GradCheckReport report;
  report.groups.push_back(compare("A", probe.cos_coeffs(), analytic.dA, step, loss));
  report.groups.push_back(compare("B", probe.sin_coeffs(), analytic.dB, step, loss));
  if (probe.bias())
    report.groups.push_back(compare("bias", *probe.bias(), *analytic.dBias, step, loss));
  report.groups.push_back(compare("x", input.data(), analytic.dX.data(), step, loss));
  return report;
}

GradCheckReport check_affine_gradients(const AffineMap &map, const Matrix &x,
                                       const Matrix &upstream, double step) {
  AffineMap grad = map.zeros_like();
  const Matrix dx = map.backward_into(x, upstream, grad);
  AffineMap probe = map;
  Matrix input = x;
  auto loss = [&]() { return weighted_sum(probe.forward(input), upstream); };

  GradCheckReport report;
  report.groups.push_back(
      compare("weight", probe.weights(), grad.weights(), step, loss));
  if (probe.has_bias())
    report.groups.push_back(compare("bias", probe.bias(), grad.bias(), step, loss));
  report.groups.push_back(compare("x", input.data(), dx.data(), step, loss));
  return report;
}

GradCheckReport check_model_gradients(const Model &model,
                                      const MolecularGraph &graph, double step,
                                      const std::function<void(Model &)> &tamper,
                                      double floor) {
  Model grad = model.zeros_like();
  model.accumulate_gradients(graph, grad);
  if (tamper)
    tamper(grad);

  Model probe = model;
  auto params = probe.parameters();
  const auto grads = grad.parameters();
  auto loss = [&]() { return probe.loss(graph); };

  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    GradCheckGroup group { params[p].name, params[p].values.size(), 0.0 };
    for (std::size_t i = 0; i < params[p].values.size(); ++i) {
      const double numeric = central_difference(params[p].values[i], step, loss);
      group.max_relative_error =
          std::max(group.max_relative_error,
                   gradient_relative_error(grads[p].values[i], numeric, floor));
    }
    report.groups.push_back(std::move(group));
  }
  return report;
}

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, double lo, double hi,
                     Rng &rng) {
  Matrix m(rows, cols);
  for (auto &v : m.data())
    v = rng.uniform(lo, hi);
  return m;
}

// Folds a report into per-(suite, group) rows keeping the worst error.
class RowCollector {
 public:
  void add(const std::string &suite, const GradCheckReport &report, double tol) {
    for (const auto &g : report.groups) {
      const auto key = std::make_pair(suite, g.name);
      auto it = index_.find(key);
      if (it == index_.end()) {
        index_[key] = rows_.size();
        rows_.push_back({ suite, g.name, 1, g.max_relative_error, tol });
      } else {
        auto &row = rows_[it->second];
        ++row.cases;
        row.max_relative_error = std::max(row.max_relative_error, g.max_relative_error);
      }
    }
  }
  std::vector<GradCheckSuiteRow> take() { return std::move(rows_); }

 private:
  std::map<std::pair<std::string, std::string>, std::size_t> index_;
  std::vector<GradCheckSuiteRow> rows_;
};

}  // namespace

bool GradCheckSuiteResult::passed() const {
  return !rows.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const auto &r) { return r.passed(); });
}

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions &options) {
  RowCollector rows;
  Rng rng(options.seed);
  for (std::size_t c = 0; c < options.layer_cases; ++c) {
    const std::size_t n_in = 1 + rng.below(4), n_out = 1 + rng.below(4);
    const std::size_t k = 1 + rng.below(4), batch = 1 + rng.below(4);
    const auto layer = FourierKanLayer::init(n_in, n_out, k, rng, rng.below(2) == 1);
    const Matrix x = random_matrix(batch, n_in, -3.0, 3.0, rng);
    const Matrix up = random_matrix(batch, n_out, -1.0, 1.0, rng);
    rows.add("fkan", check_layer_gradients(layer, x, up), kLayerGradientTolerance);

    const auto map = AffineMap::init(n_in, n_out, rng, rng.below(2) == 1);
    rows.add("affine", check_affine_gradients(map, x, up), kLayerGradientTolerance);
  }

  auto tamper = [](Model &grad) {
    auto params = grad.parameters();
    params.front().values[0] += 1e-3;
  };
  for (const auto variant : options.variants) {
    for (std::size_t g = 0; g < options.graphs; ++g) {
      Rng graph_rng(mix_seed(options.seed, 1000 + g));
      Molecule mol = random_molecule(3 + graph_rng.below(5), 2, graph_rng);
      // Every task labeled, so no parameter is trivially checked at zero loss.
      for (std::size_t t = 0; t < mol.labels.size(); ++t)
        if (!mol.labels[t])
          mol.labels[t] = static_cast<int>(t % 2);
      const MolecularGraph graph = build_graph(mol, 3.0);
      ModelConfig config;
      config.variant = variant;
      config.n_layers = options.n_layers;
      config.harmonics = options.harmonics;
      config.hidden_dim = options.hidden_dim;
      config.n_tasks = 2;
      config.kan_bias = true;
      config.seed = mix_seed(options.seed, g);
      const Model model = Model::init(config);
      const auto report = options.corrupt
                              ? check_model_gradients(model, graph, 1e-4, tamper)
                              : check_model_gradients(model, graph);
      rows.add(std::string(to_string(variant)), report, kModelGradientTolerance);
    }
  }
  return { rows.take() };
}

}  // namespace kagnn
