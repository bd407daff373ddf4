// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace kagnn {

/// Seeded generator used for every random draw in the library.
///
/// The bit stream is std::mt19937_64 (fully specified by the standard).
/// Uniform doubles take the top 53 bits; normals use the Box-Muller
/// transform with a cached second variate; bounded integers use rejection
/// sampling. None of these go through std::*_distribution, whose algorithms
/// are implementation-defined, so draws are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) { }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates shuffle driven by below().
  template <class T>
  void shuffle(std::vector<T> &items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a salt.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace kagnn
