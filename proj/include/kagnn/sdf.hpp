// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

#include "kagnn/molecule.hpp"

namespace kagnn {

/// Reads the V2000 connection-table subset of an SD file.
///
/// Per record: title line (becomes the id), two header lines, counts line,
/// atom block (x, y, z, symbol, charge code) and bond block (i, j, type;
/// types 1-4 map to single/double/triple/aromatic). `M  CHG` lines override
/// the atom-block charge codes. A `PUBCHEM_MMFF94_PARTIAL_CHARGES` or
/// `PARTIAL_CHARGES` data item, when present, supplies partial charges
/// instead. Every other property line and data item is skipped. Bond
/// directions are left at None and in_ring comes from cycle detection.
///
/// Errors are ParseError with the 1-based record number and line number.
std::vector<Molecule> parse_sdf_v2000(std::string_view text);

}  // namespace kagnn
