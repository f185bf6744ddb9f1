//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_CHEM_CONFORMER_H_
#define DUALRETRO_CHEM_CONFORMER_H_

#include <optional>
#include <vector>

#include "dualretro/chem/molecule.h"
#include "dualretro/numerics/rng.h"

namespace dualretro {

struct ConformerOptions {
  int steps = 500;
  double step_size = 0.05;
  // Per-atom displacement cap per step, in angstrom.
  double max_move = 0.3;
};

// Bond length target: sum of covalent radii scaled by bond order.
double target_bond_length(const Molecule &mol, int bond);

// Minimum separation enforced between atoms that are neither bonded nor
// share a neighbor.
double min_nonbonded_distance(int element_a, int element_b);

// Crude distance-geometry layout: random start, then gradient relaxation
// towards bond lengths, valence-angle 1-3 distances and non-bonded
// clearances. Atoms with a value in `fixed` keep those coordinates
// exactly; the rest start near an already placed neighbor.
std::vector<Vec3> embed_conformer(
    const Molecule &mol, Rng &rng, const ConformerOptions &options = {},
    const std::vector<std::optional<Vec3>> &fixed = {});

// Convenience: embeds in place when the molecule has no coordinates.
void ensure_coords(Molecule &mol, Rng &rng);

}  // namespace dualretro

#endif  // DUALRETRO_CHEM_CONFORMER_H_
