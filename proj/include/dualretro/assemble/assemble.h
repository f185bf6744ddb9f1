//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_ASSEMBLE_ASSEMBLE_H_
#define DUALRETRO_ASSEMBLE_ASSEMBLE_H_

#include <span>
#include <string>
#include <vector>

#include "dualretro/chem/molecule.h"
#include "dualretro/chem/reaction.h"

namespace dualretro {

// Distance rules for bond perception, as fractions of the covalent radius
// sum r_i + r_j.
struct BondPerception {
  double tolerance = 1.2;  // bond iff d <= tolerance * sum
  double double_below = 0.91;
  double triple_below = 0.82;
};

struct InferredBond {
  int i;
  int j;
  BondType type;
};

// Bonds between atom pairs of a point cloud, i < j, ordered by (i, j).
// Pairs with both atoms flagged in `skip` are never considered (their bonds
// come from elsewhere). Orders follow distance alone.
std::vector<InferredBond> infer_bonds(std::span<const int> elements,
                                      std::span<const Vec3> coords,
                                      std::span<const char> skip = {},
                                      const BondPerception &rules = {});

// Human-readable valence violations; empty when every atom is within
// max_valence or the element is unknown to the check.
std::vector<std::string> valence_check(const Molecule &mol);

// A synthon ready for completion: its atoms with the product's bonds and
// coordinates, the product hydrogen count of every atom, and the bond order
// each atom lost at the reaction center.
struct SynthonTemplate {
  Molecule fragment;                 // must carry coordinates
  std::vector<int> product_hydrogens;
  std::vector<int> lost_order;       // 0 for atoms away from the center
};

// Template of one synthon; the parent must carry coordinates. Throws
// std::invalid_argument otherwise.
SynthonTemplate make_template(const Synthon &synthon);

struct Candidate {
  Molecule molecule;
  bool valid = false;
  bool connected = false;  // generated atoms attached to the synthon
  std::vector<std::string> problems;
};

// Merges sampled atoms (element, position) into the synthon. Synthon bonds
// are copied; bonds touching generated atoms are perceived from distances,
// shortest relative distance first, and upgraded to double or triple only
// while both ends have valence left. Synthon hydrogens follow
// product count + lost order - new bond order.
Candidate complete_reactant(const SynthonTemplate &synthon,
                            std::span<const int> sampled_elements,
                            std::span<const Vec3> sampled_coords,
                            const BondPerception &rules = {});

}  // namespace dualretro

#endif  // DUALRETRO_ASSEMBLE_ASSEMBLE_H_
