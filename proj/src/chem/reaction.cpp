//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/chem/reaction.h"

#include <algorithm>
#include <string>

namespace dualretro {

std::unordered_map<int, AtomRef>
reactant_map_index(const std::vector<Molecule> &reactants) {
  std::unordered_map<int, AtomRef> index;
  for (int r = 0; r < static_cast<int>(reactants.size()); ++r) {
    for (int a = 0; a < reactants[r].num_atoms(); ++a) {
      const int map = reactants[r].atom(a).map;
      if (map == 0)
        continue;
      if (!index.emplace(map, AtomRef { r, a }).second)
        throw InvalidReaction("atom map " + std::to_string(map)
                              + " appears more than once in the reactants");
    }
  }
  return index;
}

void validate_reaction(const Reaction &rxn) {
  const auto index = reactant_map_index(rxn.reactants);
  std::unordered_map<int, int> seen;
  for (int i = 0; i < rxn.product.num_atoms(); ++i) {
    const int map = rxn.product.atom(i).map;
    if (map == 0)
      throw MissingAtomMap("product atom " + std::to_string(i)
                           + " has no atom map");
    if (!index.count(map))
      throw MissingAtomMap("product atom map " + std::to_string(map)
                           + " not found in the reactants");
    if (!seen.emplace(map, i).second)
      throw InvalidReaction("product atom map " + std::to_string(map)
                            + " is used twice");
  }
}

Tensor derive_center_labels(const Reaction &rxn) {
  validate_reaction(rxn);
  const auto index = reactant_map_index(rxn.reactants);
  const int n = rxn.product.num_atoms();
  Tensor y = Tensor::matrix(n, n);
  for (const Bond &b: rxn.product.bonds()) {
    const AtomRef u = index.at(rxn.product.atom(b.src).map);
    const AtomRef v = index.at(rxn.product.atom(b.dst).map);
    const bool kept =
        u.molecule == v.molecule
        && rxn.reactants[u.molecule].find_bond(u.atom, v.atom) >= 0;
    if (!kept) {
      y(b.src, b.dst) = 1.0;
      y(b.dst, b.src) = 1.0;
    }
  }
  return y;
}

std::vector<std::pair<int, int>> center_bonds(const Tensor &labels) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < labels.rows(); ++i)
    for (int j = i + 1; j < labels.cols(); ++j)
      if (labels(i, j) > 0.5)
        out.emplace_back(i, j);
  return out;
}

Molecule Synthon::fragment() const {
  const std::pair<int, int> drop[] = { broken_bond };
  return parent.subgraph(atom_ids, drop);
}

std::vector<Synthon> extract_synthons(const Molecule &product,
                                      std::pair<int, int> bond) {
  const auto [a, b] = bond;
  const int k = product.find_bond(a, b);
  if (k < 0)
    throw NotABond("atoms " + std::to_string(a) + " and " + std::to_string(b)
                   + " are not bonded");

  // Flood fill from each endpoint while ignoring the broken bond.
  const int n = product.num_atoms();
  auto reach = [&](int start) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack = { start };
    seen[start] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: product.neighbors(u)) {
        if (nb.bond == k || seen[nb.atom])
          continue;
        seen[nb.atom] = true;
        stack.push_back(nb.atom);
      }
    }
    std::vector<int> ids;
    for (int i = 0; i < n; ++i)
      if (seen[i])
        ids.push_back(i);
    return ids;
  };

  std::vector<Synthon> out;
  std::vector<int> first = reach(a);
  const bool bridge = !std::binary_search(first.begin(), first.end(), b);
  out.push_back({ product, std::move(first), bond });
  if (bridge)
    out.push_back({ product, reach(b), bond });
  return out;
}

}  // namespace dualretro
