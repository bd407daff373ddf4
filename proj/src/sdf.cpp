// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/sdf.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>

#include "kagnn/elements.hpp"
#include "kagnn/errors.hpp"

namespace kagnn {
namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string_view field(std::string_view line, std::size_t pos, std::size_t len) {
  if (pos >= line.size())
    return {};
  return strip(line.substr(pos, len));
}

std::optional<int> to_int(std::string_view s) {
  s = strip(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    return std::nullopt;
  return value;
}

std::optional<double> to_double(std::string_view s) {
  s = strip(s);
  if (s.empty())
    return std::nullopt;
  std::string buf(s);
  char *end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size())
    return std::nullopt;
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])))
      ++j;
    if (j > i)
      out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double charge_from_code(int code) {
  switch (code) {
  case 1: return 3.0;
  case 2: return 2.0;
  case 3: return 1.0;
  case 5: return -1.0;
  case 6: return -2.0;
  case 7: return -3.0;
  default: return 0.0;
  }
}

class RecordParser {
 public:
  RecordParser(std::vector<std::string_view> lines, std::size_t record,
               std::size_t first_line)
      : lines_(std::move(lines)), record_(record), first_line_(first_line) { }

  Molecule parse();

 private:
  [[noreturn]] void fail(std::size_t offset, const std::string &what) const {
    throw ParseError("SDF record " + std::to_string(record_) + " (line " +
                     std::to_string(first_line_ + offset) + "): " + what);
  }

  void parse_atom(std::size_t offset, Molecule &mol) const;
  void parse_bond(std::size_t offset, Molecule &mol) const;
  void parse_partial_charges(std::size_t offset, Molecule &mol) const;

  std::vector<std::string_view> lines_;
  std::size_t record_;
  std::size_t first_line_;
};

void RecordParser::parse_atom(std::size_t offset, Molecule &mol) const {
  const auto line = lines_[offset];
  Atom atom;
  std::string_view symbol;
  int charge_code = 0;

  auto x = to_double(field(line, 0, 10));
  auto y = to_double(field(line, 10, 10));
  auto z = to_double(field(line, 20, 10));
  if (x && y && z && line.size() >= 32) {
    atom.position = { *x, *y, *z };
    symbol = field(line, 31, 3);
    charge_code = to_int(field(line, 36, 3)).value_or(0);
  } else {
    // Not column-aligned; fall back to whitespace tokens.
    const auto tokens = split_ws(line);
    if (tokens.size() < 4)
      fail(offset, "truncated atom line");
    x = to_double(tokens[0]);
    y = to_double(tokens[1]);
    z = to_double(tokens[2]);
    if (!x || !y || !z)
      fail(offset, "invalid atom coordinates");
    atom.position = { *x, *y, *z };
    symbol = tokens[3];
    if (tokens.size() > 5)
      charge_code = to_int(tokens[5]).value_or(0);
  }
  const auto *info = find_element_loose(symbol);
  if (info == nullptr)
    fail(offset, "unknown element symbol '" + std::string(symbol) + "'");
  atom.element = std::string(info->symbol);
  atom.atomic_number = info->atomic_number;
  atom.partial_charge = charge_from_code(charge_code);
  mol.atoms.push_back(std::move(atom));
}

void RecordParser::parse_bond(std::size_t offset, Molecule &mol) const {
  const auto line = lines_[offset];
  auto i = to_int(field(line, 0, 3));
  auto j = to_int(field(line, 3, 3));
  auto type = to_int(field(line, 6, 3));
  if (!i || !j || !type) {
    const auto tokens = split_ws(line);
    if (tokens.size() < 3)
      fail(offset, "truncated bond line");
    i = to_int(tokens[0]);
    j = to_int(tokens[1]);
    type = to_int(tokens[2]);
    if (!i || !j || !type)
      fail(offset, "invalid bond line");
  }
  const auto n = static_cast<int>(mol.atoms.size());
  if (*i < 1 || *i > n || *j < 1 || *j > n)
    fail(offset, "bond atom index out of range");
  if (*type < 1 || *type > 4)
    fail(offset, "unsupported bond type " + std::to_string(*type));
  Bond bond;
  bond.i = static_cast<std::size_t>(*i - 1);
  bond.j = static_cast<std::size_t>(*j - 1);
  bond.type = static_cast<BondType>(*type - 1);
  mol.bonds.push_back(bond);
}

void RecordParser::parse_partial_charges(std::size_t offset,
                                         Molecule &mol) const {
  std::vector<std::string_view> body;
  for (std::size_t k = offset; k < lines_.size() && !strip(lines_[k]).empty(); ++k)
    body.push_back(lines_[k]);
  if (body.empty())
    return;

  auto head = split_ws(body.front());
  if (head.size() == 1 && body.size() > 1) {
    // PubChem layout: count, then "atom_index charge" pairs.
    const auto count = to_int(head[0]);
    if (!count || static_cast<std::size_t>(*count) + 1 != body.size())
      fail(offset, "partial charge block count does not match its lines");
    for (auto &atom : mol.atoms)
      atom.partial_charge = 0.0;
    for (std::size_t k = 1; k < body.size(); ++k) {
      const auto tokens = split_ws(body[k]);
      const auto idx = tokens.size() == 2 ? to_int(tokens[0]) : std::nullopt;
      const auto q = tokens.size() == 2 ? to_double(tokens[1]) : std::nullopt;
      if (!idx || !q || *idx < 1 || *idx > static_cast<int>(mol.atoms.size()))
        fail(offset + k, "invalid partial charge entry");
      mol.atoms[static_cast<std::size_t>(*idx - 1)].partial_charge = *q;
    }
    return;
  }

  std::vector<double> values;
  for (auto line : body) {
    for (auto token : split_ws(line)) {
      const auto q = to_double(token);
      if (!q)
        fail(offset, "invalid partial charge value");
      values.push_back(*q);
    }
  }
  if (values.size() != mol.atoms.size())
    fail(offset, "partial charge count does not match atom count");
  for (std::size_t a = 0; a < values.size(); ++a)
    mol.atoms[a].partial_charge = values[a];
}

Molecule RecordParser::parse() {
  if (lines_.size() < 4)
    fail(lines_.size(), "header block is truncated");

  Molecule mol;
  mol.id = std::string(strip(lines_[0]));

  const auto counts = lines_[3];
  if (counts.find("V3000") != std::string_view::npos)
    fail(3, "V3000 connection tables are not supported");
  const auto n_atoms = to_int(field(counts, 0, 3));
  const auto n_bonds = to_int(field(counts, 3, 3));
  if (!n_atoms || !n_bonds || *n_atoms < 0 || *n_bonds < 0)
    fail(3, "malformed counts line");

  const auto atom_begin = std::size_t { 4 };
  const auto bond_begin = atom_begin + static_cast<std::size_t>(*n_atoms);
  const auto props_begin = bond_begin + static_cast<std::size_t>(*n_bonds);
  if (lines_.size() < props_begin)
    fail(lines_.size(), "atom or bond block is truncated (expected " +
                            std::to_string(*n_atoms) + " atoms and " +
                            std::to_string(*n_bonds) + " bonds)");

  for (std::size_t k = atom_begin; k < bond_begin; ++k)
    parse_atom(k, mol);
  for (std::size_t k = bond_begin; k < props_begin; ++k)
    parse_bond(k, mol);

  bool charges_reset = false;
  std::optional<std::size_t> partial_block;
  bool in_ctab = true;
  for (std::size_t k = props_begin; k < lines_.size(); ++k) {
    const auto line = lines_[k];
    if (in_ctab && line.starts_with("M  END")) {
      in_ctab = false;
      continue;
    }
    if (in_ctab && line.starts_with("M  CHG")) {
      if (!charges_reset) {
        for (auto &atom : mol.atoms)
          atom.partial_charge = 0.0;
        charges_reset = true;
      }
      const auto tokens = split_ws(line.substr(6));
      const auto count = tokens.empty() ? std::nullopt : to_int(tokens[0]);
      if (!count || tokens.size() != 1 + 2 * static_cast<std::size_t>(*count))
        fail(k, "malformed M  CHG line");
      for (int c = 0; c < *count; ++c) {
        const auto idx = to_int(tokens[1 + 2 * c]);
        const auto q = to_int(tokens[2 + 2 * c]);
        if (!idx || !q || *idx < 1 || *idx > static_cast<int>(mol.atoms.size()))
          fail(k, "invalid atom reference in M  CHG line");
        mol.atoms[static_cast<std::size_t>(*idx - 1)].partial_charge = *q;
      }
      continue;
    }
    if (!in_ctab && line.starts_with(">")) {
      const auto open = line.find('<');
      const auto close = line.find('>', open == std::string_view::npos ? 0 : open);
      if (open != std::string_view::npos && close != std::string_view::npos) {
        const auto name = line.substr(open + 1, close - open - 1);
        if (name == "PUBCHEM_MMFF94_PARTIAL_CHARGES" || name == "PARTIAL_CHARGES")
          partial_block = k + 1;
      }
    }
  }
  if (partial_block)
    parse_partial_charges(*partial_block, mol);

  try {
    mol.validate();
  } catch (const ParseError &e) {
    fail(0, e.what());
  }
  const auto rings = ring_bond_flags(mol.atoms.size(), mol.bonds);
  for (std::size_t b = 0; b < mol.bonds.size(); ++b)
    mol.bonds[b].in_ring = rings[b];
  return mol;
}

}  // namespace

std::vector<Molecule> parse_sdf_v2000(std::string_view text) {
  std::vector<std::string_view> all;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    all.push_back(line);
    pos = nl + 1;
  }

  std::vector<Molecule> mols;
  std::vector<std::string_view> record;
  std::size_t record_start = 1;
  std::size_t record_no = 0;
  auto flush = [&]() {
    const bool blank = std::all_of(record.begin(), record.end(),
                                   [](std::string_view l) { return strip(l).empty(); });
    if (!blank) {
      ++record_no;
      mols.push_back(RecordParser(record, record_no, record_start).parse());
    }
    record.clear();
  };
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (strip(all[k]) == "$$$$") {
      flush();
      record_start = k + 2;
      continue;
    }
    record.push_back(all[k]);
  }
  flush();
  return mols;
}

}  // namespace kagnn
