// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic molecules for tests, gradient checks and the parity
//! learning task.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kagnn/molecule.hpp"

namespace kagnn {

class Rng;

/// n unbonded carbon atoms uniform in a cube of side `box` (Angstrom).
Molecule random_point_cloud(std::size_t n, double box, Rng &rng);

/// Small random molecule: a bonded random-walk chain (bond length ~1.5 A)
/// with random extra ring closures, elements from {C, N, O, S, F}, random
/// partial charges in [-0.5, 0.5] and random 0/1/missing labels for
/// `n_tasks` tasks.
Molecule random_molecule(std::size_t n_atoms, std::size_t n_tasks, Rng &rng);

struct ParityTaskOptions {
  std::size_t count = 200;
  std::size_t min_atoms = 2;
  std::size_t max_atoms = 7;
  double jitter = 0.05;  // Angstrom, per coordinate
  std::uint64_t seed = 0;
};

/// Carbon zigzag chains in random poses with jittered coordinates; the single
/// label is 1 when the atom count is even and 0 when odd.
std::vector<Molecule> make_parity_dataset(const ParityTaskOptions &options);

}  // namespace kagnn
