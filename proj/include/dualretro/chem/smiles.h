//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_CHEM_SMILES_H_
#define DUALRETRO_CHEM_SMILES_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dualretro/chem/molecule.h"

namespace dualretro {

class SmilesError: public std::invalid_argument {
public:
  SmilesError(const std::string &what, std::size_t position)
      : std::invalid_argument(what + " at position "
                              + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class UnsupportedToken: public SmilesError {
public:
  using SmilesError::SmilesError;
};

class UnclosedRing: public SmilesError {
public:
  using SmilesError::SmilesError;
};

class UnbalancedParenthesis: public SmilesError {
public:
  using SmilesError::SmilesError;
};

// Parses the supported SMILES subset: organic-subset atoms, bracket atoms
// with element, hydrogen count, charge and atom map, ring closures (digits
// and %nn), branches, '.', and the bond symbols - = # :. Stereo marks and
// isotopes are rejected.
//
// An unmarked bond between two aromatic atoms is aromatic when it lies on a
// ring and single otherwise. A bracket hydrogen count equal to the implicit
// count is folded back into the implicit model.
Molecule parse_smiles(std::string_view text);

struct SmilesWriteOptions {
  bool atom_maps = true;
  // Cap on explored individualization leaves for highly symmetric graphs.
  int max_leaves = 10000;
};

// Canonical SMILES: isomorphic molecules give byte-identical strings.
// `order`, when given, receives the parent atom index of every atom in output
// order.
std::string write_smiles(const Molecule &mol,
                         const SmilesWriteOptions &options = {},
                         std::vector<int> *order = nullptr);

// Canonical string with atom maps removed, used for exact-match comparison.
std::string canonical_smiles(const Molecule &mol);

// Canonical form of a set of molecules: each canonicalized without maps,
// sorted, joined with '.'.
std::string canonical_smiles_set(const std::vector<Molecule> &mols);

}  // namespace dualretro

#endif  // DUALRETRO_CHEM_SMILES_H_
