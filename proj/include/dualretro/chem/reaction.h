//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_CHEM_REACTION_H_
#define DUALRETRO_CHEM_REACTION_H_

#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dualretro/chem/molecule.h"
#include "dualretro/numerics/tensor.h"

namespace dualretro {

class MissingAtomMap: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class InvalidReaction: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class NotABond: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Single-product reaction. Atom maps live on the atoms (Atom::map).
struct Reaction {
  Molecule product;
  std::vector<Molecule> reactants;
  std::optional<int> class_id;
};

// Location of an atom inside a reactant list.
struct AtomRef {
  int molecule;
  int atom;
};

// Map number -> reactant atom. Throws InvalidReaction when a map number is
// used twice across the reactants.
std::unordered_map<int, AtomRef>
reactant_map_index(const std::vector<Molecule> &reactants);

// Checks that every product atom carries a map number that appears exactly
// once among the reactants. Throws MissingAtomMap or InvalidReaction.
void validate_reaction(const Reaction &rxn);

// Y (n x n, n = product atoms): Y_ij = 1 iff product bond (i, j) has no bond
// between the mapped reactant atoms.
Tensor derive_center_labels(const Reaction &rxn);

// Product bonds flagged by Y, as (i, j) with i < j.
std::vector<std::pair<int, int>> center_bonds(const Tensor &labels);

struct Synthon {
  Molecule parent;
  std::vector<int> atom_ids;  // parent indices, ascending
  std::pair<int, int> broken_bond;

  // The fragment as a molecule with the broken bond removed; atom k of the
  // result is parent atom atom_ids[k].
  Molecule fragment() const;
};

// Deleting a bridge gives two synthons (the one holding `bond.first` comes
// first); deleting a ring bond gives one synthon over every atom of the
// component. Throws NotABond.
std::vector<Synthon> extract_synthons(const Molecule &product,
                                      std::pair<int, int> bond);

}  // namespace dualretro

#endif  // DUALRETRO_CHEM_REACTION_H_
