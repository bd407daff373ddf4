// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace kagnn {

enum class BondType { Single, Double, Triple, Aromatic };

// Seven-way stereo direction tag carried by covalent bonds.
enum class BondDirection {
  None,
  BeginWedge,
  BeginDash,
  EndDownRight,
  EndUpRight,
  EitherDouble,
  Unknown,
};

inline constexpr std::size_t kNumBondTypes = 4;
inline constexpr std::size_t kNumBondDirections = 7;

std::string_view to_string(BondType type);
std::string_view to_string(BondDirection direction);
std::optional<BondType> parse_bond_type(std::string_view text);
std::optional<BondDirection> parse_bond_direction(std::string_view text);

struct Atom {
  std::string element;
  int atomic_number = 0;
  std::array<double, 3> position {};
  double partial_charge = 0.0;

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  std::size_t i = 0;
  std::size_t j = 0;
  BondType type = BondType::Single;
  BondDirection direction = BondDirection::None;
  bool in_ring = false;

  friend bool operator==(const Bond &, const Bond &) = default;
};

struct Molecule {
  std::string id;
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  // One entry per task: 0, 1, or missing.
  std::vector<std::optional<int>> labels;

  /// Throws ParseError on out-of-range or self bonds, duplicate bonds,
  /// non-finite positions, or an empty atom list.
  void validate() const;

  friend bool operator==(const Molecule &, const Molecule &) = default;
};

double distance(const Atom &a, const Atom &b);

/// in_ring flag per bond: a bond is in a ring iff it is not a bridge of the
/// covalent graph.
std::vector<bool> ring_bond_flags(std::size_t n_atoms,
                                  const std::vector<Bond> &bonds);

Molecule molecule_from_json(const nlohmann::json &doc);
nlohmann::json molecule_to_json(const Molecule &mol);

/// Parses one molecule document. Bonds without "in_ring" get the flag from
/// ring detection; a missing "direction" means None and a missing "charge"
/// means 0.
Molecule parse_molecule_json(std::string_view text);
std::string serialize_molecule_json(const Molecule &mol);

/// JSON-lines stream, one molecule per non-blank line. Errors carry
/// `source:line`.
std::vector<Molecule> read_molecules_jsonl(std::istream &in,
                                           const std::string &source = "<input>");
void write_molecules_jsonl(std::ostream &out,
                           const std::vector<Molecule> &mols);

}  // namespace kagnn
