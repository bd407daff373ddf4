// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/elements.hpp"

#include <iterator>
#include <cctype>
#include <string>

namespace kagnn {
namespace {

constexpr ElementInfo kElements[] = {
#include "element_data.inc"
};

}  // namespace

const ElementInfo *find_element(std::string_view symbol) {
  for (const auto &e : kElements) {
    if (e.symbol == symbol)
      return &e;
  }
  return nullptr;
}

const ElementInfo *find_element_loose(std::string_view symbol) {
  if (symbol.empty())
    return nullptr;
  std::string norm(symbol);
  norm[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(norm[0])));
  for (std::size_t i = 1; i < norm.size(); ++i)
    norm[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(norm[i])));
  return find_element(norm);
}

const ElementInfo *find_element(int atomic_number) {
  if (atomic_number < 1 || atomic_number > static_cast<int>(std::size(kElements)))
    return nullptr;
  return &kElements[static_cast<std::size_t>(atomic_number - 1)];
}

}  // namespace kagnn
