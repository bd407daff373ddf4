// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every line passes. Each check builds its own inputs from fixed seeds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "kagnn/fitfn.hpp"
#include "kagnn/fkan.hpp"
#include "kagnn/gradcheck.hpp"
#include "kagnn/graph.hpp"
#include "kagnn/model.hpp"
#include "kagnn/rng.hpp"
#include "kagnn/sdf.hpp"
#include "kagnn/synthetic.hpp"
#include "kagnn/train.hpp"
#include "test_support.hpp"

using namespace kagnn;
using kagnn::testing::brute_force_cutoff_pairs;
using kagnn::testing::fixture_path;
using kagnn::testing::read_file;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// 1 -----------------------------------------------------------------------
Outcome scope_statement() {
  // Nothing numeric to reproduce: the MoleculeNet figures need upstream 3D
  // generation, scaffold splits and full datasets. What must hold is that
  // every run report says so.
  RunReport report;
  const auto doc = report.to_json();
  const bool labeled = doc.at("paper_comparable") == false &&
                       doc.at("split_provenance") == "random_seeded";
  return { labeled,
           "benchmark-scale MoleculeNet ROC-AUCs are out of reach at desk scale; "
           "reports carry paper_comparable=false and the split provenance" };
}

// 2 -----------------------------------------------------------------------
Outcome gradient_soundness() {
  const auto t0 = Clock::now();
  const auto result = run_gradcheck_suite(GradCheckSuiteOptions {});
  const double secs = seconds_since(t0);
  double layer_worst = 0.0, model_worst = 0.0;
  std::size_t graphs = 0;
  for (const auto &row : result.rows) {
    if (row.suite == "fkan" || row.suite == "affine")
      layer_worst = std::max(layer_worst, row.max_relative_error);
    else {
      model_worst = std::max(model_worst, row.max_relative_error);
      graphs = std::max(graphs, row.cases);
    }
  }
  const bool pass = result.passed() && layer_worst < 1e-6 && model_worst < 1e-5 &&
                    graphs >= 10 && secs < 60.0;
  return { pass, fmt("layers max rel err %.2e (<1e-6), models max rel err %.2e (<1e-5) "
                     "on %zu graphs per variant, %.1f s (<60 s)",
                     layer_worst, model_worst, graphs, secs) };
}

// 3 -----------------------------------------------------------------------
Outcome forward_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2026);
  std::size_t cases = 0;
  double worst = 0.0;
  for (std::size_t n_in = 1; n_in <= 8; ++n_in) {
    for (std::size_t n_out = 1; n_out <= 8; n_out += 2) {
      for (std::size_t k = 1; k <= 5; ++k) {
        const std::size_t batch = 1 + rng.below(8);
        auto layer = FourierKanLayer::init(n_in, n_out, k, rng.next_u64(), rng.below(2) == 1);
        if (layer.has_bias())
          for (auto &b : *layer.bias())
            b = rng.normal();
        const auto x = kagnn::testing::random_matrix(batch, n_in, rng, -10.0, 10.0);
        worst = std::max(worst, max_abs_diff(layer.forward(x),
                                             kagnn::testing::naive_fkan_forward(layer, x)));
        ++cases;
      }
    }
  }
  const double secs = seconds_since(t0);
  return { cases >= 100 && worst < 1e-12 && secs < 10.0,
           fmt("%zu shape/seed combinations, max abs diff %.2e (<1e-12), %.2f s (<10 s)",
               cases, worst, secs) };
}

// 4 -----------------------------------------------------------------------
Outcome graph_oracle() {
  Rng rng(44);
  std::size_t mismatches = 0, edges = 0;
  for (int cloud = 0; cloud < 50; ++cloud) {
    const auto mol = random_point_cloud(2 + rng.below(29), rng.uniform(5.0, 12.0), rng);
    for (int c = 0; c <= 5; ++c) {
      const auto g = build_graph(mol, c);
      std::set<std::pair<std::size_t, std::size_t>> got;
      for (const auto &e : g.edges)
        if (e.kind == EdgeKind::Cutoff)
          got.insert({ std::min(e.u, e.v), std::max(e.u, e.v) });
      mismatches += got != brute_force_cutoff_pairs(mol, c);
      edges += got.size();
    }
  }
  Molecule pair;
  pair.atoms.resize(2);
  for (auto &a : pair.atoms) { a.element = "C"; a.atomic_number = 6; }
  pair.atoms[1].position = { 3.0, 4.0, 0.0 };  // exactly 5 A
  const bool boundary = build_graph(pair, 5.0).edges.size() == 1;
  return { mismatches == 0 && boundary,
           fmt("50 clouds x cutoffs 0..5: %zu mismatching edge sets (%zu edges checked); "
               "d = 5.0 boundary edge %s", mismatches, edges, boundary ? "present" : "MISSING") };
}

// 5 -----------------------------------------------------------------------
Outcome featurization_layout() {
  std::istringstream in(read_file(fixture_path("corpus.jsonl")));
  auto mols = read_molecules_jsonl(in, "corpus.jsonl");
  const auto sdf = parse_sdf_v2000(read_file(fixture_path("three.sdf")));
  mols.insert(mols.end(), sdf.begin(), sdf.end());
  bool ok = mols.size() == 8 && kNodeFeatureDim == 92 && kEdgeFeatureDim == 21 &&
            node_layout::kAtomicNumberBins + node_layout::kRadiusBins +
                    node_layout::kElectronegativityBins == 92;
  std::size_t nodes = 0, edge_count = 0;
  for (const auto &mol : mols) {
    const auto g = build_graph(mol);
    ok &= g.node_features.cols() == 92;
    nodes += g.num_nodes();
    for (const auto &e : g.edges) {
      ++edge_count;
      const auto &f = e.features;
      double chem = 0.0;
      for (std::size_t k = 0; k < 11; ++k) chem += f[k];
      chem += f[13] + f[14];
      // covalent: one-hot direction + type + ring = 3; cutoff: all zero
      ok &= chem == (e.kind == EdgeKind::Covalent ? 3.0 : 0.0);
      const double d = distance(mol.atoms[e.u], mol.atoms[e.v]);
      ok &= f[11] == d && std::abs(f[12] - d * d) < 1e-12;
      ok &= std::abs(f[18] - 1.0 / d) < 1e-15 && f[17] == f[15] * f[16];
    }
  }
  Molecule pair;
  pair.atoms.resize(2);
  for (auto &a : pair.atoms) { a.element = "C"; a.atomic_number = 6; }
  pair.atoms[1].position = { 2.0, 0.0, 0.0 };
  const auto f = featurize_edge(pair, 0, 1, EdgeKind::Cutoff);
  const bool example = f[18] == 0.5 && f[19] == 0.015625 && f[20] == 0.000244140625 &&
                       f[11] == 2.0 && f[12] == 4.0;
  return { ok && example,
           fmt("%zu fixture molecules, %zu node vectors of width 92, %zu edge vectors of "
               "width 21 (7+4+2+2 | 3+3); d = 2.0 gives (%.1f, %.6f, %.12f)",
               mols.size(), nodes, edge_count, f[18], f[19], f[20]) };
}

// 6 -----------------------------------------------------------------------
Outcome in_class_recovery() {
  double worst = 0.0;
  std::string parts;
  for (std::size_t k : { 3, 5, 10 }) {
    auto task = default_task(FitTarget::SinPlusCos);
    task.harmonics = k;
    const auto r = run_fit(task, FitArm::FourierKan, 1);
    worst = std::max(worst, r.test_mse);
    parts += fmt("%sK=%zu %.1e", parts.empty() ? "" : ", ", k, r.test_mse);
  }
  return { worst < 1e-6, "sin 2x + cos 3x test MSE: " + parts + " (<1e-6)" };
}

// 7 -----------------------------------------------------------------------
Outcome function_fits() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string parts;
  for (auto target : standard_targets()) {
    const auto task = default_task(target);
    const auto r = run_fit(task, FitArm::FourierKan, 1);
    const bool periodic = target == FitTarget::Sin || target == FitTarget::SinPlusCos;
    const double limit = periodic ? 1e-3 : 1e-2;
    ok &= r.test_mse < limit;
    parts += fmt("%s%s(K=%zu) %.1e", parts.empty() ? "" : ", ",
                 std::string(to_string(target)).c_str(), task.harmonics, r.test_mse);
  }
  double best5 = INFINITY, best500 = INFINITY;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto sweep = sweep_k(default_task(FitTarget::Polynomial), { 5, 500 }, seed);
    best5 = std::min(best5, sweep[0].test_mse);
    best500 = std::min(best500, sweep[1].test_mse);
  }
  const double secs = seconds_since(t0);
  ok &= best500 <= best5 && best500 < 1e-2 && secs < 300.0;
  return { ok, parts + fmt("; polynomial best-of-3 K=5 %.1e vs K=500 %.1e; %.0f s (<300 s)",
                           best5, best500, secs) };
}

// 8 -----------------------------------------------------------------------
Outcome learning_sanity() {
  ParityTaskOptions opt;
  opt.count = 200;
  opt.seed = 1;
  const auto mols = make_parity_dataset(opt);
  auto graphs_at = [&](double cutoff) {
    std::vector<MolecularGraph> out;
    for (const auto &m : mols)
      out.push_back(build_graph(m, cutoff));
    return out;
  };
  TrainConfig config;  // batch 128, lr 1e-4, K 2, 1 layer, cutoff 5
  config.epochs = 200;
  config.seed = 1;
  const auto split = random_split(mols.size(), config.seed);

  const auto t0 = Clock::now();
  const auto result = train_loop(graphs_at(5.0), config, split);
  const double secs = seconds_since(t0);

  auto covalent_only = config;
  covalent_only.cutoff = 0.0;
  covalent_only.epochs = 0;
  const auto report0 = train_loop(graphs_at(0.0), covalent_only, split).report;
  const auto &r5 = result.report;
  const std::size_t e0 = report0.covalent_edges + report0.cutoff_edges;
  const std::size_t e5 = r5.covalent_edges + r5.cutoff_edges;
  const bool pass = r5.test_auc >= 0.95 && r5.epochs.size() <= 200 && e0 != e5 &&
                    report0.cutoff_edges == 0;
  return { pass, fmt("parity KA-GNN (batch 128, lr 1e-4, K 2, L 1): test ROC-AUC %.3f (>=0.95) "
                     "after %zu epochs (best %zu), %.0f s; edges cutoff 0 A = %zu "
                     "(%zu covalent), 5 A = %zu (%zu covalent + %zu cutoff)",
                     r5.test_auc, r5.epochs.size(), r5.best_epoch, secs, e0,
                     report0.covalent_edges, e5, r5.covalent_edges, r5.cutoff_edges) };
}

// 9 -----------------------------------------------------------------------
Outcome metric_correctness() {
  Rng rng(99);
  std::size_t mismatches = 0, invariance_failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.below(19);
    std::vector<double> s(n), transformed(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(6)) - 2.5;  // coarse grid: many ties
      transformed[i] = std::exp(3.0 * s[i]) + 7.0;
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[rng.below(n)] = 1;
    std::size_t neg = rng.below(n);
    while (labels[neg] == 1 && n > 1) {
      labels[neg] = 0;
      if (std::count(labels.begin(), labels.end(), 1) == 0)
        labels[(neg + 1) % n] = 1;
    }
    const double auc = roc_auc(s, labels);
    mismatches += auc != kagnn::testing::pairwise_auc(s, labels);
    invariance_failures += auc != roc_auc(transformed, labels);
  }
  return { mismatches == 0 && invariance_failures == 0,
           fmt("1000 random instances: %zu oracle mismatches, %zu monotone-transform "
               "invariance failures", mismatches, invariance_failures) };
}

// 10 ----------------------------------------------------------------------
Outcome parameter_accounting() {
  struct Row { const char *dataset; std::size_t k, layers, tasks; };
  const std::vector<Row> grid {
    { "BACE", 1, 3, 1 },  { "BBBP", 2, 1, 1 },  { "ClinTox", 2, 2, 2 },
    { "SIDER", 2, 1, 27 }, { "Tox21", 2, 2, 12 }, { "HIV", 2, 2, 1 },
    { "MUV", 2, 2, 17 },
  };
  bool ok = true;
  std::string parts;
  for (auto variant : { Variant::KaGnn, Variant::KaGat }) {
    for (const auto &row : grid) {
      ModelConfig c;
      c.variant = variant;
      c.harmonics = row.k;
      c.n_layers = row.layers;
      c.n_tasks = row.tasks;
      auto model = Model::init(c);
      std::size_t sum = 0;
      for (const auto &p : model.parameters())
        sum += p.values.size();
      ok &= sum == model.parameter_count() &&
            sum == kagnn::testing::formula_count(c);
      parts += fmt("%s%s/%s %zu", parts.empty() ? "" : ", ", row.dataset,
                   std::string(to_string(variant)).c_str(), model.parameter_count());
    }
  }
  return { ok, "enumerate-and-sum, parameter_count and the closed form agree for all 14 configs: " + parts };
}

}  // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria {
    { "scope", scope_statement },
    { "gradient soundness", gradient_soundness },
    { "forward oracle", forward_oracle },
    { "graph construction oracle", graph_oracle },
    { "featurization widths and layout", featurization_layout },
    { "in-class recovery", in_class_recovery },
    { "univariate function fits", function_fits },
    { "learning sanity", learning_sanity },
    { "metric correctness", metric_correctness },
    { "parameter accounting", parameter_accounting },
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = { false, std::string("exception: ") + e.what() };
    }
    failures += !o.pass;
    std::printf("%s  [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
