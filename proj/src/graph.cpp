// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kagnn/elements.hpp"
#include "kagnn/errors.hpp"

namespace kagnn {
namespace {

std::size_t uniform_bin(double value, double lo, double hi, std::size_t bins) {
  const double width = (hi - lo) / static_cast<double>(bins);
  const double pos = std::floor((value - lo) / width);
  if (pos < 0.0)
    return 0;
  return std::min(static_cast<std::size_t>(pos), bins - 1);
}

const Bond *find_bond(const Molecule &mol, std::size_t u, std::size_t v) {
  for (const auto &bond : mol.bonds) {
    if ((bond.i == u && bond.j == v) || (bond.i == v && bond.j == u))
      return &bond;
  }
  return nullptr;
}

}  // namespace

std::size_t MolecularGraph::count_edges(EdgeKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      edges.begin(), edges.end(), [kind](const Edge &e) { return e.kind == kind; }));
}

EdgeFeatures MolecularGraph::features_toward(std::size_t edge,
                                             std::size_t node) const {
  const auto &e = edges.at(edge);
  EdgeFeatures f = e.features;
  if (node == e.u)
    std::swap(f[edge_slot::kChargeU], f[edge_slot::kChargeV]);
  else if (node != e.v)
    throw std::invalid_argument("node is not an endpoint of the edge");
  return f;
}

std::array<double, kNodeFeatureDim> featurize_node(const Atom &atom) {
  using namespace node_layout;
  const auto *info = find_element(atom.atomic_number);
  if (info == nullptr || !info->featurizable())
    throw FeaturizeError("element '" + atom.element +
                         "' has no tabulated radius/electronegativity");

  std::array<double, kNodeFeatureDim> f {};
  const auto z_bin = static_cast<std::size_t>(
      std::min<int>(atom.atomic_number, static_cast<int>(kAtomicNumberBins)) - 1);
  f[z_bin] = 1.0;
  f[kRadiusOffset +
    uniform_bin(info->covalent_radius, kRadiusMin, kRadiusMax, kRadiusBins)] = 1.0;
  f[kElectronegativityOffset +
    uniform_bin(info->electronegativity, kElectronegativityMin,
                kElectronegativityMax, kElectronegativityBins)] = 1.0;
  return f;
}

EdgeFeatures featurize_edge(const Molecule &mol, std::size_t u, std::size_t v,
                            EdgeKind kind) {
  if (u >= mol.atoms.size() || v >= mol.atoms.size() || u == v)
    throw std::invalid_argument("invalid atom pair for edge featurization");
  const Bond *bond = find_bond(mol, u, v);
  if (kind == EdgeKind::Covalent && bond == nullptr)
    throw FeaturizeError("covalent edge requested for unbonded atoms " +
                         std::to_string(u) + "-" + std::to_string(v));
  if (kind == EdgeKind::Cutoff && bond != nullptr)
    throw FeaturizeError("cutoff edge requested for bonded atoms " +
                         std::to_string(u) + "-" + std::to_string(v));

  const double d = distance(mol.atoms[u], mol.atoms[v]);
  if (!(d > 0.0))
    throw FeaturizeError("atoms " + std::to_string(u) + " and " +
                         std::to_string(v) + " are coincident");

  EdgeFeatures f {};
  if (kind == EdgeKind::Covalent) {
    f[edge_slot::kDirection + static_cast<std::size_t>(bond->direction)] = 1.0;
    f[edge_slot::kBondType + static_cast<std::size_t>(bond->type)] = 1.0;
    f[edge_slot::kInRing + (bond->in_ring ? 1 : 0)] = 1.0;
  }
  f[edge_slot::kLength] = d;
  f[edge_slot::kLength + 1] = d * d;

  const double qu = mol.atoms[u].partial_charge;
  const double qv = mol.atoms[v].partial_charge;
  f[edge_slot::kChargeU] = qu;
  f[edge_slot::kChargeV] = qv;
  f[edge_slot::kChargeProduct] = qu * qv;

  const double inv = 1.0 / d;
  const double inv2 = inv * inv;
  const double inv6 = inv2 * inv2 * inv2;
  f[edge_slot::kInverseDistance] = inv;
  f[edge_slot::kInverseDistance + 1] = inv6;
  f[edge_slot::kInverseDistance + 2] = inv6 * inv6;
  return f;
}

MolecularGraph build_graph(const Molecule &mol, double cutoff) {
  if (!(cutoff >= 0.0) || !std::isfinite(cutoff))
    throw std::invalid_argument("cutoff must be a finite non-negative distance");
  mol.validate();

  const std::size_t n = mol.atoms.size();
  MolecularGraph g;
  g.id = mol.id;
  g.node_features = Matrix(n, kNodeFeatureDim);
  for (std::size_t a = 0; a < n; ++a) {
    const auto f = featurize_node(mol.atoms[a]);
    std::copy(f.begin(), f.end(), g.node_features.row(a).begin());
  }

  std::vector<std::vector<bool>> bonded(n, std::vector<bool>(n, false));
  for (const auto &bond : mol.bonds) {
    bonded[bond.i][bond.j] = bonded[bond.j][bond.i] = true;
    g.edges.push_back({ bond.i, bond.j, EdgeKind::Covalent,
                        featurize_edge(mol, bond.i, bond.j, EdgeKind::Covalent) });
  }
  if (cutoff > 0.0) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (bonded[u][v] || distance(mol.atoms[u], mol.atoms[v]) > cutoff)
          continue;
        g.edges.push_back({ u, v, EdgeKind::Cutoff,
                            featurize_edge(mol, u, v, EdgeKind::Cutoff) });
      }
    }
  }

  g.adjacency.assign(n, {});
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    g.adjacency[g.edges[e].u].push_back({ g.edges[e].v, e });
    g.adjacency[g.edges[e].v].push_back({ g.edges[e].u, e });
  }

  for (const auto &label : mol.labels) {
    g.labels.push_back(label ? static_cast<double>(*label) : 0.0);
    g.mask.push_back(label ? 1 : 0);
  }
  return g;
}

nlohmann::json graph_to_json(const MolecularGraph &graph, double cutoff) {
  using nlohmann::json;
  json nodes = json::array();
  for (std::size_t a = 0; a < graph.num_nodes(); ++a) {
    const auto row = graph.node_features.row(a);
    nodes.push_back(std::vector<double>(row.begin(), row.end()));
  }
  json edges = json::array();
  for (const auto &e : graph.edges) {
    edges.push_back({ { "u", e.u },
                      { "v", e.v },
                      { "kind", e.kind == EdgeKind::Covalent ? "covalent" : "cutoff" },
                      { "features", e.features } });
  }
  json labels = json::array();
  for (std::size_t t = 0; t < graph.num_tasks(); ++t) {
    if (graph.mask[t])
      labels.push_back(static_cast<int>(graph.labels[t]));
    else
      labels.push_back(nullptr);
  }
  return { { "id", graph.id },
           { "n_atoms", graph.num_nodes() },
           { "cutoff", cutoff },
           { "node_features", std::move(nodes) },
           { "edges", std::move(edges) },
           { "labels", std::move(labels) } };
}

}  // namespace kagnn
