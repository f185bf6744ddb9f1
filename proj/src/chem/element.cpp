//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/chem/element.h"

#include <array>
#include <cstdlib>
#include <span>

namespace dualretro {
namespace {
// Covalent radii: B. Cordero et al., "Covalent radii revisited", Dalton
// Trans. 2008, 2832-2838. sp3 carbon is used for C; 1.50 marks elements the
// pipeline never expects to generate.
constexpr std::array<ElementInfo, 86> kElements = { {
    { 1, "H", 0.31 },   { 2, "He", 0.28 },  { 3, "Li", 1.28 },
    { 4, "Be", 0.96 },  { 5, "B", 0.84 },   { 6, "C", 0.76 },
    { 7, "N", 0.71 },   { 8, "O", 0.66 },   { 9, "F", 0.57 },
    { 10, "Ne", 0.58 }, { 11, "Na", 1.66 }, { 12, "Mg", 1.41 },
    { 13, "Al", 1.21 }, { 14, "Si", 1.11 }, { 15, "P", 1.07 },
    { 16, "S", 1.05 },  { 17, "Cl", 1.02 }, { 18, "Ar", 1.06 },
    { 19, "K", 2.03 },  { 20, "Ca", 1.76 }, { 21, "Sc", 1.70 },
    { 22, "Ti", 1.60 }, { 23, "V", 1.53 },  { 24, "Cr", 1.39 },
    { 25, "Mn", 1.39 }, { 26, "Fe", 1.32 }, { 27, "Co", 1.26 },
    { 28, "Ni", 1.24 }, { 29, "Cu", 1.32 }, { 30, "Zn", 1.22 },
    { 31, "Ga", 1.22 }, { 32, "Ge", 1.20 }, { 33, "As", 1.19 },
    { 34, "Se", 1.20 }, { 35, "Br", 1.20 }, { 36, "Kr", 1.16 },
    { 37, "Rb", 2.20 }, { 38, "Sr", 1.95 }, { 39, "Y", 1.90 },
    { 40, "Zr", 1.75 }, { 41, "Nb", 1.64 }, { 42, "Mo", 1.54 },
    { 43, "Tc", 1.47 }, { 44, "Ru", 1.46 }, { 45, "Rh", 1.42 },
    { 46, "Pd", 1.39 }, { 47, "Ag", 1.45 }, { 48, "Cd", 1.44 },
    { 49, "In", 1.42 }, { 50, "Sn", 1.39 }, { 51, "Sb", 1.39 },
    { 52, "Te", 1.38 }, { 53, "I", 1.39 },  { 54, "Xe", 1.40 },
    { 55, "Cs", 2.44 }, { 56, "Ba", 2.15 }, { 57, "La", 2.07 },
    { 58, "Ce", 2.04 }, { 59, "Pr", 2.03 }, { 60, "Nd", 2.01 },
    { 61, "Pm", 1.99 }, { 62, "Sm", 1.98 }, { 63, "Eu", 1.98 },
    { 64, "Gd", 1.96 }, { 65, "Tb", 1.94 }, { 66, "Dy", 1.92 },
    { 67, "Ho", 1.92 }, { 68, "Er", 1.89 }, { 69, "Tm", 1.90 },
    { 70, "Yb", 1.87 }, { 71, "Lu", 1.87 }, { 72, "Hf", 1.75 },
    { 73, "Ta", 1.70 }, { 74, "W", 1.62 },  { 75, "Re", 1.51 },
    { 76, "Os", 1.44 }, { 77, "Ir", 1.41 }, { 78, "Pt", 1.36 },
    { 79, "Au", 1.36 }, { 80, "Hg", 1.32 }, { 81, "Tl", 1.45 },
    { 82, "Pb", 1.46 }, { 83, "Bi", 1.48 }, { 84, "Po", 1.40 },
    { 85, "At", 1.50 }, { 86, "Rn", 1.50 },
} };

constexpr std::array<int, 9> kSlotElements = { 6, 7, 8, 9, 15, 16, 17, 35, 53 };

// Charge adjustment of the neutral valence by periodic group.
int charge_shift(int z, int charge) {
  if (charge == 0)
    return 0;
  switch (z) {
  case 5:  // B-: 4
    return -charge;
  case 6:  // C+ / C-: 3
    return -std::abs(charge);
  case 7:
  case 8:
  case 15:
  case 16:
  case 33:
  case 34:
    return charge;
  default:
    return -std::abs(charge);
  }
}

std::span<const int> neutral_valences(int z) {
  static constexpr int b[] = { 3 }, c[] = { 4 }, n[] = { 3, 5 }, o[] = { 2 },
                       p[] = { 3, 5 }, s[] = { 2, 4, 6 }, hal[] = { 1 };
  switch (z) {
  case 5:
    return b;
  case 6:
    return c;
  case 7:
    return n;
  case 8:
    return o;
  case 15:
    return p;
  case 16:
    return s;
  case 9:
  case 17:
  case 35:
  case 53:
    return hal;
  default:
    return {};
  }
}
}  // namespace

const ElementInfo *element_info(int z) {
  if (z < 1 || z > static_cast<int>(kElements.size()))
    return nullptr;
  return &kElements[z - 1];
}

int atomic_number(std::string_view symbol) {
  for (const ElementInfo &e: kElements)
    if (e.symbol == symbol)
      return e.atomic_number;
  return 0;
}

int element_slot(int z) {
  for (int i = 0; i < static_cast<int>(kSlotElements.size()); ++i)
    if (kSlotElements[i] == z)
      return i;
  return kOtherElementSlot;
}

int slot_element(int slot) {
  if (slot < 0 || slot >= static_cast<int>(kSlotElements.size()))
    return 0;
  return kSlotElements[slot];
}

bool is_organic_subset(int z) {
  switch (z) {
  case 6:
  case 7:
  case 8:
  case 9:
  case 15:
  case 16:
  case 17:
  case 35:
  case 53:
    return true;
  default:
    return false;
  }
}

bool has_aromatic_form(int z) {
  return z == 6 || z == 7 || z == 8 || z == 15 || z == 16;
}

int default_valence(int z, int charge) {
  for (int v: neutral_valences(z)) {
    const int adjusted = v + charge_shift(z, charge);
    if (adjusted >= 0)
      return adjusted;
  }
  return -1;
}

int default_valence_at_least(int z, int charge, int used) {
  for (int v: neutral_valences(z)) {
    const int adjusted = v + charge_shift(z, charge);
    if (adjusted >= used)
      return adjusted;
  }
  return -1;
}

int max_valence(int z, int charge) {
  int neutral;
  switch (z) {
  case 5:
    neutral = 3;
    break;
  case 6:
    neutral = 4;
    break;
  case 7:
    neutral = 3;
    break;
  case 8:
    neutral = 2;
    break;
  case 9:
  case 17:
  case 35:
  case 53:
    neutral = 1;
    break;
  case 15:
    neutral = 5;
    break;
  case 16:
    neutral = 6;
    break;
  default:
    return -1;
  }
  return neutral + charge_shift(z, charge);
}

}  // namespace dualretro
