// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>

namespace kagnn {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  // Negative when not tabulated.
  double covalent_radius;
  double electronegativity;

  bool featurizable() const {
    return covalent_radius > 0.0 && electronegativity > 0.0;
  }
};

// Case-sensitive lookup ("Cl", not "CL"); see find_element_loose for SDF.
const ElementInfo *find_element(std::string_view symbol);
// Accepts any capitalization, as found in some connection-table writers.
const ElementInfo *find_element_loose(std::string_view symbol);
const ElementInfo *find_element(int atomic_number);

}  // namespace kagnn
