// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

//! Molecular graph construction and featurization.
//!
//! The graph's edge set is the union of covalent bonds and every non-bonded
//! atom pair with distance <= cutoff (inclusive). Node vectors are 92 wide:
//!
//!   [0, 64)   atomic number one-hot, Z in 1..64 (Z > 64 lands in the last bin)
//!   [64, 78)  covalent radius one-hot, 14 uniform bins over [0.25, 2.10] A
//!   [78, 92)  Pauling electronegativity one-hot, 14 uniform bins over [0.7, 4.0]
//!
//! Values outside a radius/electronegativity range clamp to the edge bins.
//! Edge vectors are 21 wide, see EdgeSlot.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kagnn/molecule.hpp"
#include "kagnn/tensor.hpp"

namespace kagnn {

inline constexpr std::size_t kNodeFeatureDim = 92;
inline constexpr std::size_t kEdgeFeatureDim = 21;
inline constexpr double kDefaultCutoff = 5.0;

namespace node_layout {
inline constexpr std::size_t kAtomicNumberBins = 64;
inline constexpr std::size_t kRadiusBins = 14;
inline constexpr std::size_t kElectronegativityBins = 14;
inline constexpr std::size_t kRadiusOffset = kAtomicNumberBins;
inline constexpr std::size_t kElectronegativityOffset = kRadiusOffset + kRadiusBins;
inline constexpr double kRadiusMin = 0.25;
inline constexpr double kRadiusMax = 2.10;
inline constexpr double kElectronegativityMin = 0.7;
inline constexpr double kElectronegativityMax = 4.0;
}  // namespace node_layout

// Slot map of the 21-wide edge vector for an edge oriented u -> v.
namespace edge_slot {
inline constexpr std::size_t kDirection = 0;     // 7 one-hot (covalent only)
inline constexpr std::size_t kBondType = 7;      // 4 one-hot (covalent only)
inline constexpr std::size_t kLength = 11;       // d, d^2 (all edges)
inline constexpr std::size_t kInRing = 13;       // (not in ring, in ring) (covalent only)
inline constexpr std::size_t kChargeU = 15;
inline constexpr std::size_t kChargeV = 16;
inline constexpr std::size_t kChargeProduct = 17;
inline constexpr std::size_t kInverseDistance = 18;  // 1/d, 1/d^6, 1/d^12
}  // namespace edge_slot

enum class EdgeKind { Covalent, Cutoff };

using EdgeFeatures = std::array<double, kEdgeFeatureDim>;

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  EdgeKind kind = EdgeKind::Covalent;
  // Oriented u -> v (slot 15 holds q_u, slot 16 holds q_v).
  EdgeFeatures features {};
};

struct Incidence {
  std::size_t neighbor;
  std::size_t edge;
};

struct MolecularGraph {
  std::string id;
  Matrix node_features;  // [n_atoms, 92]
  std::vector<Edge> edges;
  std::vector<std::vector<Incidence>> adjacency;
  std::vector<double> labels;
  std::vector<std::uint8_t> mask;

  std::size_t num_nodes() const { return node_features.rows(); }
  std::size_t num_tasks() const { return labels.size(); }
  std::size_t count_edges(EdgeKind kind) const;

  /// Features of edge `edge` oriented so that `node` is the v endpoint, i.e.
  /// f_{uv} with u the other atom. Only the two charge slots move.
  EdgeFeatures features_toward(std::size_t edge, std::size_t node) const;
};

std::array<double, kNodeFeatureDim> featurize_node(const Atom &atom);

/// f_uv for the pair (u, v). Covalent edges require a bond between u and v;
/// cutoff edges must not have one. Coincident atoms are rejected.
EdgeFeatures featurize_edge(const Molecule &mol, std::size_t u, std::size_t v,
                            EdgeKind kind);

/// cutoff = 0 gives the covalent-only graph.
MolecularGraph build_graph(const Molecule &mol, double cutoff = kDefaultCutoff);

/// Featurized-graph dump record:
///   {"id", "n_atoms", "cutoff", "node_features": [[92 numbers] per atom],
///    "edges": [{"u", "v", "kind": "covalent"|"cutoff", "features": [21]}],
///    "labels": [0|1|null per task]}
nlohmann::json graph_to_json(const MolecularGraph &graph, double cutoff);

}  // namespace kagnn
