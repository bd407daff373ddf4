// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations shared by the unit tests and the
// acceptance binary. Nothing here calls into the production code paths it
// is compared against.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kagnn/fkan.hpp"
#include "kagnn/model.hpp"
#include "kagnn/molecule.hpp"
#include "kagnn/rng.hpp"
#include "kagnn/tensor.hpp"

namespace kagnn::testing {

inline std::string fixture_path(const std::string &name) {
  return std::string(KAGNN_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng &rng,
                            double lo = -3.0, double hi = 3.0) {
  Matrix m(rows, cols);
  for (auto &v : m.data())
    v = rng.uniform(lo, hi);
  return m;
}

// Plain triple loop straight from the layer definition, reading coefficients
// through the (k, j, i) accessors only.
inline Matrix naive_fkan_forward(const FourierKanLayer &layer, const Matrix &x) {
  Matrix out(x.rows(), layer.n_out());
  for (std::size_t b = 0; b < x.rows(); ++b) {
    for (std::size_t j = 0; j < layer.n_out(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < layer.n_in(); ++i) {
        for (std::size_t k = 1; k <= layer.harmonics(); ++k) {
          const double kx = static_cast<double>(k) * x(b, i);
          s += layer.cos_coeff(k, j, i) * std::cos(kx) +
               layer.sin_coeff(k, j, i) * std::sin(kx);
        }
      }
      if (layer.bias())
        s += (*layer.bias())[j];
      out(b, j) = s;
    }
  }
  return out;
}

inline FourierKanLayer random_layer(std::size_t n_in, std::size_t n_out,
                                    std::size_t k, bool bias, Rng &rng) {
  FourierKanLayer layer(n_in, n_out, k, bias);
  for (auto &v : layer.cos_coeffs())
    v = rng.normal();
  for (auto &v : layer.sin_coeffs())
    v = rng.normal();
  if (bias)
    for (auto &v : *layer.bias())
      v = rng.normal();
  return layer;
}

// Unordered pairs (u < v) within `cutoff` that are not bonded, by brute force.
inline std::set<std::pair<std::size_t, std::size_t>>
brute_force_cutoff_pairs(const Molecule &mol, double cutoff) {
  std::set<std::pair<std::size_t, std::size_t>> bonded, out;
  for (const auto &b : mol.bonds)
    bonded.insert({ std::min(b.i, b.j), std::max(b.i, b.j) });
  if (cutoff <= 0.0)
    return out;
  const std::size_t n = mol.atoms.size();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const auto &p = mol.atoms[u].position;
      const auto &q = mol.atoms[v].position;
      const double d = std::sqrt((p[0] - q[0]) * (p[0] - q[0]) +
                                 (p[1] - q[1]) * (p[1] - q[1]) +
                                 (p[2] - q[2]) * (p[2] - q[2]));
      if (d <= cutoff && !bonded.count({ u, v }))
        out.insert({ u, v });
    }
  }
  return out;
}

// Pairwise-counting AUC: fraction of (positive, negative) pairs ordered
// correctly, ties counting one half.
inline double pairwise_auc(const std::vector<double> &scores,
                           const std::vector<int> &labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] != 1)
      continue;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != 0)
        continue;
      ++pairs;
      if (scores[p] > scores[q])
        wins += 1.0;
      else if (scores[p] == scores[q])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Closed-form count for the documented architectures.
inline std::size_t formula_count(const ModelConfig &c) {
  const std::size_t k = c.harmonics, h = c.hidden_dim, L = c.n_layers;
  const std::size_t b = c.kan_bias ? 1 : 0;
  auto kan = [&](std::size_t in, std::size_t out, bool bias) {
    return 2 * k * in * out + (bias ? out : 0);
  };
  std::size_t total = kan(113, h, b);
  if (c.variant == Variant::KaGnn) {
    total += L * kan(2 * h, h, b);
  } else {
    total += (92 + 21 + 92) * h;                 // edge init, no biases
    total += L * 2 * (h * h + h);                 // node / neighbor projections
    total += L * (kan(h, h, b) + kan(h, h, false));
  }
  if (c.resolved_readout_layers() == 1)
    total += kan(h, c.n_tasks, b);
  else
    total += kan(h, h, b) + kan(h, c.n_tasks, b);
  return total;
}

}  // namespace kagnn::testing
