// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kagnn/elements.hpp"
#include "kagnn/rng.hpp"

namespace kagnn {
namespace {

Atom make_atom(const char *symbol, std::array<double, 3> pos, double charge) {
  Atom atom;
  atom.element = symbol;
  atom.atomic_number = find_element(symbol)->atomic_number;
  atom.position = pos;
  atom.partial_charge = charge;
  return atom;
}

std::array<double, 3> random_direction(Rng &rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(1.0 - z * z);
  return { r * std::cos(phi), r * std::sin(phi), z };
}

// Random walk that keeps every atom at least `min_gap` from earlier ones.
std::vector<std::array<double, 3>> random_chain(std::size_t n, double bond,
                                                double min_gap, Rng &rng) {
  std::vector<std::array<double, 3>> pos { { 0.0, 0.0, 0.0 } };
  while (pos.size() < n) {
    const auto &prev = pos.back();
    std::array<double, 3> next {};
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto dir = random_direction(rng);
      const double len = bond * rng.uniform(0.95, 1.05);
      next = { prev[0] + len * dir[0], prev[1] + len * dir[1], prev[2] + len * dir[2] };
      bool clear = true;
      for (std::size_t k = 0; k + 1 < pos.size(); ++k) {
        const double dx = next[0] - pos[k][0], dy = next[1] - pos[k][1],
                     dz = next[2] - pos[k][2];
        if (std::sqrt(dx * dx + dy * dy + dz * dz) < min_gap) {
          clear = false;
          break;
        }
      }
      if (clear)
        break;
    }
    pos.push_back(next);
  }
  return pos;
}

// Planar all-trans zigzag (C-C 1.54 A, 109.5 degrees) in a uniformly random
// orientation and position, each atom then displaced by N(0, jitter^2).
std::vector<std::array<double, 3>> zigzag_chain(std::size_t n, double jitter,
                                                Rng &rng) {
  constexpr double kBond = 1.54;
  const double half_angle = 0.5 * 109.5 * std::numbers::pi / 180.0;
  // Random rotation from a uniformly drawn unit quaternion.
  double q[4];
  double norm = 0.0;
  for (auto &c : q) {
    c = rng.normal();
    norm += c * c;
  }
  norm = std::sqrt(norm);
  for (auto &c : q)
    c /= norm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  const double rot[3][3] = {
    { 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y) },
    { 2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x) },
    { 2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y) },
  };
  const std::array<double, 3> origin { rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0),
                                       rng.uniform(0.0, 10.0) };
  std::vector<std::array<double, 3>> pos;
  for (std::size_t a = 0; a < n; ++a) {
    const double local[3] = { static_cast<double>(a) * kBond * std::sin(half_angle),
                              (a % 2) * kBond * std::cos(half_angle), 0.0 };
    std::array<double, 3> p {};
    for (int r = 0; r < 3; ++r) {
      p[r] = origin[r] + rng.normal(0.0, jitter);
      for (int c = 0; c < 3; ++c)
        p[r] += rot[r][c] * local[c];
    }
    pos.push_back(p);
  }
  return pos;
}

}  // namespace

Molecule random_point_cloud(std::size_t n, double box, Rng &rng) {
  Molecule mol;
  mol.id = "cloud";
  for (std::size_t a = 0; a < n; ++a)
    mol.atoms.push_back(make_atom(
        "C", { rng.uniform(0.0, box), rng.uniform(0.0, box), rng.uniform(0.0, box) },
        0.0));
  return mol;
}

Molecule random_molecule(std::size_t n_atoms, std::size_t n_tasks, Rng &rng) {
  static constexpr const char *kSymbols[] = { "C", "N", "O", "S", "F" };
  Molecule mol;
  mol.id = "random";
  const auto pos = random_chain(n_atoms, 1.5, 1.2, rng);
  for (std::size_t a = 0; a < n_atoms; ++a)
    mol.atoms.push_back(make_atom(kSymbols[rng.below(5)], pos[a],
                                  rng.uniform(-0.5, 0.5)));
  for (std::size_t a = 0; a + 1 < n_atoms; ++a) {
    Bond bond;
    bond.i = a;
    bond.j = a + 1;
    bond.type = static_cast<BondType>(rng.below(kNumBondTypes));
    bond.direction = static_cast<BondDirection>(rng.below(kNumBondDirections));
    mol.bonds.push_back(bond);
  }
  if (n_atoms >= 4 && rng.uniform() < 0.5) {
    Bond closure;
    closure.i = 0;
    closure.j = n_atoms - 1;
    mol.bonds.push_back(closure);
  }
  const auto rings = ring_bond_flags(mol.atoms.size(), mol.bonds);
  for (std::size_t b = 0; b < mol.bonds.size(); ++b)
    mol.bonds[b].in_ring = rings[b];
  for (std::size_t t = 0; t < n_tasks; ++t) {
    const double r = rng.uniform();
    if (r < 0.1)
      mol.labels.emplace_back(std::nullopt);
    else
      mol.labels.emplace_back(r < 0.55 ? 0 : 1);
  }
  return mol;
}

std::vector<Molecule> make_parity_dataset(const ParityTaskOptions &options) {
  Rng rng(options.seed);
  std::vector<Molecule> mols;
  for (std::size_t m = 0; m < options.count; ++m) {
    const std::size_t n =
        options.min_atoms + rng.below(options.max_atoms - options.min_atoms + 1);
    Molecule mol;
    mol.id = "parity-" + std::to_string(m);
    const auto pos = zigzag_chain(n, options.jitter, rng);
    for (const auto &p : pos)
      mol.atoms.push_back(make_atom("C", p, 0.0));
    for (std::size_t a = 0; a + 1 < n; ++a) {
      Bond bond;
      bond.i = a;
      bond.j = a + 1;
      mol.bonds.push_back(bond);
    }
    mol.labels.emplace_back(n % 2 == 0 ? 1 : 0);
    mols.push_back(std::move(mol));
  }
  return mols;
}

}  // namespace kagnn
