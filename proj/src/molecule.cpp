// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/molecule.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "kagnn/elements.hpp"
#include "kagnn/errors.hpp"

namespace kagnn {
namespace {

using nlohmann::json;

std::string normalize_token(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '_' || c == '-' || c == ' ')
      continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

[[noreturn]] void field_error(const std::string &field, const std::string &what) {
  throw ParseError("field '" + field + "': " + what);
}

const json &require(const json &obj, const char *key, const std::string &ctx) {
  if (!obj.is_object())
    field_error(ctx, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    field_error(ctx.empty() ? key : ctx + "." + key, "missing required field");
  return *it;
}

double get_number(const json &v, const std::string &field) {
  if (!v.is_number())
    field_error(field, "expected a number");
  return v.get<double>();
}

std::size_t get_index(const json &v, const std::string &field) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    field_error(field, "expected a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace

std::string_view to_string(BondType type) {
  switch (type) {
  case BondType::Single: return "single";
  case BondType::Double: return "double";
  case BondType::Triple: return "triple";
  case BondType::Aromatic: return "aromatic";
  }
  return "single";
}

std::string_view to_string(BondDirection direction) {
  switch (direction) {
  case BondDirection::None: return "none";
  case BondDirection::BeginWedge: return "begin_wedge";
  case BondDirection::BeginDash: return "begin_dash";
  case BondDirection::EndDownRight: return "end_down_right";
  case BondDirection::EndUpRight: return "end_up_right";
  case BondDirection::EitherDouble: return "either_double";
  case BondDirection::Unknown: return "unknown";
  }
  return "none";
}

std::optional<BondType> parse_bond_type(std::string_view text) {
  const auto t = normalize_token(text);
  if (t == "single" || t == "1")
    return BondType::Single;
  if (t == "double" || t == "2")
    return BondType::Double;
  if (t == "triple" || t == "3")
    return BondType::Triple;
  if (t == "aromatic" || t == "4")
    return BondType::Aromatic;
  return std::nullopt;
}

std::optional<BondDirection> parse_bond_direction(std::string_view text) {
  const auto t = normalize_token(text);
  if (t == "none" || t.empty())
    return BondDirection::None;
  if (t == "beginwedge")
    return BondDirection::BeginWedge;
  if (t == "begindash")
    return BondDirection::BeginDash;
  if (t == "enddownright")
    return BondDirection::EndDownRight;
  if (t == "endupright")
    return BondDirection::EndUpRight;
  if (t == "eitherdouble")
    return BondDirection::EitherDouble;
  if (t == "unknown")
    return BondDirection::Unknown;
  return std::nullopt;
}

double distance(const Atom &a, const Atom &b) {
  const double dx = a.position[0] - b.position[0];
  const double dy = a.position[1] - b.position[1];
  const double dz = a.position[2] - b.position[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void Molecule::validate() const {
  const std::string ctx = id.empty() ? std::string("molecule") : "molecule '" + id + "'";
  if (atoms.empty())
    throw ParseError(ctx + ": at least one atom is required");
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    for (double c : atoms[a].position) {
      if (!std::isfinite(c))
        throw ParseError(ctx + ": atoms[" + std::to_string(a) +
                         "] has a non-finite coordinate");
    }
    if (!std::isfinite(atoms[a].partial_charge))
      throw ParseError(ctx + ": atoms[" + std::to_string(a) +
                       "] has a non-finite charge");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    const auto &bond = bonds[b];
    const std::string where = ctx + ": bonds[" + std::to_string(b) + "]";
    if (bond.i >= atoms.size() || bond.j >= atoms.size())
      throw ParseError(where + " references atom index out of range (i=" +
                       std::to_string(bond.i) + ", j=" + std::to_string(bond.j) +
                       ", n_atoms=" + std::to_string(atoms.size()) + ")");
    if (bond.i == bond.j)
      throw ParseError(where + " is a self-bond");
    if (!seen.emplace(std::min(bond.i, bond.j), std::max(bond.i, bond.j)).second)
      throw ParseError(where + " duplicates an earlier bond");
  }
}

std::vector<bool> ring_bond_flags(std::size_t n_atoms,
                                  const std::vector<Bond> &bonds) {
  // Iterative Tarjan bridge finding; parallel bonds are rejected upstream,
  // so skipping the tree edge by bond id is enough.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n_atoms);
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    adj[bonds[b].i].emplace_back(bonds[b].j, b);
    adj[bonds[b].j].emplace_back(bonds[b].i, b);
  }
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> disc(n_atoms, kUnvisited), low(n_atoms, 0);
  std::vector<bool> in_ring(bonds.size(), true);
  std::size_t timer = 0;

  struct Frame {
    std::size_t node;
    std::size_t parent_bond;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n_atoms; ++root) {
    if (disc[root] != kUnvisited)
      continue;
    std::vector<Frame> stack { { root, kUnvisited, 0 } };
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      auto &top = stack.back();
      if (top.next < adj[top.node].size()) {
        const auto [nbr, bond] = adj[top.node][top.next++];
        if (bond == top.parent_bond)
          continue;
        if (disc[nbr] == kUnvisited) {
          disc[nbr] = low[nbr] = timer++;
          stack.push_back({ nbr, bond, 0 });
        } else {
          low[top.node] = std::min(low[top.node], disc[nbr]);
        }
      } else {
        const Frame done = top;
        stack.pop_back();
        if (!stack.empty()) {
          auto &parent = stack.back();
          low[parent.node] = std::min(low[parent.node], low[done.node]);
          if (low[done.node] > disc[parent.node])
            in_ring[done.parent_bond] = false;
        }
      }
    }
  }
  return in_ring;
}

Molecule molecule_from_json(const json &doc) {
  if (!doc.is_object())
    throw ParseError("molecule document must be a JSON object");
  Molecule mol;
  if (auto it = doc.find("id"); it != doc.end()) {
    if (!it->is_string())
      field_error("id", "expected a string");
    mol.id = it->get<std::string>();
  }

  const auto &atoms = require(doc, "atoms", "");
  if (!atoms.is_array())
    field_error("atoms", "expected an array");
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const std::string ctx = "atoms[" + std::to_string(a) + "]";
    const auto &item = atoms[a];
    Atom atom;
    const auto &element = require(item, "element", ctx);
    if (!element.is_string())
      field_error(ctx + ".element", "expected a string");
    atom.element = element.get<std::string>();
    const auto *info = find_element(atom.element);
    if (info == nullptr)
      field_error(ctx + ".element", "unknown element symbol '" + atom.element + "'");
    atom.atomic_number = info->atomic_number;
    const auto &xyz = require(item, "xyz", ctx);
    if (!xyz.is_array() || xyz.size() != 3)
      field_error(ctx + ".xyz", "expected an array of 3 numbers");
    for (std::size_t c = 0; c < 3; ++c)
      atom.position[c] = get_number(xyz[c], ctx + ".xyz");
    if (auto it = item.find("charge"); it != item.end() && !it->is_null())
      atom.partial_charge = get_number(*it, ctx + ".charge");
    mol.atoms.push_back(std::move(atom));
  }

  bool need_ring_detection = false;
  std::vector<bool> explicit_ring;
  if (auto it = doc.find("bonds"); it != doc.end()) {
    if (!it->is_array())
      field_error("bonds", "expected an array");
    for (std::size_t b = 0; b < it->size(); ++b) {
      const std::string ctx = "bonds[" + std::to_string(b) + "]";
      const auto &item = (*it)[b];
      Bond bond;
      bond.i = get_index(require(item, "i", ctx), ctx + ".i");
      bond.j = get_index(require(item, "j", ctx), ctx + ".j");
      if (bond.i >= mol.atoms.size() || bond.j >= mol.atoms.size())
        field_error(ctx, "atom index out of range (i=" + std::to_string(bond.i) +
                             ", j=" + std::to_string(bond.j) + ", n_atoms=" +
                             std::to_string(mol.atoms.size()) + ")");
      const auto &type = require(item, "type", ctx);
      if (!type.is_string())
        field_error(ctx + ".type", "expected a string");
      auto parsed_type = parse_bond_type(type.get<std::string>());
      if (!parsed_type)
        field_error(ctx + ".type", "unknown bond type '" + type.get<std::string>() + "'");
      bond.type = *parsed_type;
      if (auto d = item.find("direction"); d != item.end() && !d->is_null()) {
        if (!d->is_string())
          field_error(ctx + ".direction", "expected a string");
        auto dir = parse_bond_direction(d->get<std::string>());
        if (!dir)
          field_error(ctx + ".direction",
                      "unknown bond direction '" + d->get<std::string>() + "'");
        bond.direction = *dir;
      }
      if (auto r = item.find("in_ring"); r != item.end() && !r->is_null()) {
        if (!r->is_boolean())
          field_error(ctx + ".in_ring", "expected a boolean");
        bond.in_ring = r->get<bool>();
        explicit_ring.push_back(true);
      } else {
        need_ring_detection = true;
        explicit_ring.push_back(false);
      }
      mol.bonds.push_back(bond);
    }
  }

  if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
    if (!it->is_array())
      field_error("labels", "expected an array");
    for (std::size_t t = 0; t < it->size(); ++t) {
      const auto &v = (*it)[t];
      if (v.is_null()) {
        mol.labels.emplace_back(std::nullopt);
      } else if (v.is_number() && (v.get<double>() == 0.0 || v.get<double>() == 1.0)) {
        mol.labels.emplace_back(static_cast<int>(v.get<double>()));
      } else {
        field_error("labels[" + std::to_string(t) + "]", "expected 0, 1 or null");
      }
    }
  }

  mol.validate();
  if (need_ring_detection) {
    const auto rings = ring_bond_flags(mol.atoms.size(), mol.bonds);
    for (std::size_t b = 0; b < mol.bonds.size(); ++b) {
      if (!explicit_ring[b])
        mol.bonds[b].in_ring = rings[b];
    }
  }
  return mol;
}

json molecule_to_json(const Molecule &mol) {
  json atoms = json::array();
  for (const auto &atom : mol.atoms) {
    atoms.push_back({ { "element", atom.element },
                      { "xyz", atom.position },
                      { "charge", atom.partial_charge } });
  }
  json bonds = json::array();
  for (const auto &bond : mol.bonds) {
    bonds.push_back({ { "i", bond.i },
                      { "j", bond.j },
                      { "type", to_string(bond.type) },
                      { "direction", to_string(bond.direction) },
                      { "in_ring", bond.in_ring } });
  }
  json labels = json::array();
  for (const auto &label : mol.labels) {
    if (label)
      labels.push_back(*label);
    else
      labels.push_back(nullptr);
  }
  return { { "id", mol.id },
           { "atoms", std::move(atoms) },
           { "bonds", std::move(bonds) },
           { "labels", std::move(labels) } };
}

Molecule parse_molecule_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return molecule_from_json(doc);
}

std::string serialize_molecule_json(const Molecule &mol) {
  return molecule_to_json(mol).dump();
}

std::vector<Molecule> read_molecules_jsonl(std::istream &in,
                                           const std::string &source) {
  std::vector<Molecule> mols;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c); }))
      continue;
    try {
      mols.push_back(parse_molecule_json(line));
    } catch (const ParseError &e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return mols;
}

void write_molecules_jsonl(std::ostream &out, const std::vector<Molecule> &mols) {
  for (const auto &mol : mols)
    out << serialize_molecule_json(mol) << '\n';
}

}  // namespace kagnn
