//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_CHEM_ELEMENT_H_
#define DUALRETRO_CHEM_ELEMENT_H_

#include <string_view>

namespace dualretro {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  // Single-bond covalent radius in angstrom (Cordero et al. 2008).
  double covalent_radius;
};

// Elements 1..86; nullptr for unknown numbers.
const ElementInfo *element_info(int atomic_number);

// 0 when the symbol is not an element (case-sensitive, e.g. "Cl").
int atomic_number(std::string_view symbol);

// Element vocabulary used by the feature encoders: the nine organic-subset
// elements plus one bucket for everything else.
inline constexpr int kNumElementSlots = 10;
inline constexpr int kOtherElementSlot = 9;

int element_slot(int atomic_number);

// Inverse of element_slot for the nine named slots; 0 for the other bucket.
int slot_element(int slot);

// Elements that may appear without brackets in SMILES.
bool is_organic_subset(int atomic_number);

// Elements with a lowercase aromatic form in the organic subset.
bool has_aromatic_form(int atomic_number);

// Lowest default valence adjusted for formal charge, or -1 when the element
// has no implicit-hydrogen valence model.
int default_valence(int atomic_number, int charge);

// Next allowed default valence at or above `used`, charge adjusted; -1 when
// none exists.
int default_valence_at_least(int atomic_number, int charge, int used);

// Upper bound on the bond-order sum (hydrogens included), charge adjusted.
// -1 means unchecked.
int max_valence(int atomic_number, int charge);

}  // namespace dualretro

#endif  // DUALRETRO_CHEM_ELEMENT_H_
