//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_CHEM_DATASET_H_
#define DUALRETRO_CHEM_DATASET_H_

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dualretro/chem/reaction.h"

namespace dualretro {

class MalformedRecord: public std::runtime_error {
public:
  MalformedRecord(int line, const std::string &why)
      : std::runtime_error("line " + std::to_string(line) + ": " + why),
        line_(line) {}

  int line() const { return line_; }

private:
  int line_;
};

class MultiProductRecord: public MalformedRecord {
public:
  using MalformedRecord::MalformedRecord;
};

// One reaction per line:
//
//   {"product": "...", "reactants": ["...", ...],
//    "maps": {"product": [...], "reactants": [[...], ...]},
//    "class": 3,
//    "coords": {"product": [[x, y, z], ...], "reactants": [[[x, y, z], ...]]}}
//
// "maps" lists atom-map numbers in SMILES atom order and overrides maps
// written inside bracket atoms; "class" and "coords" are optional. Blank
// lines are skipped. Errors carry the 1-based line number.
std::vector<Reaction> read_reactions(std::istream &in);
std::vector<Reaction> load_reactions(const std::string &path);

// Inverse of the reader: canonical SMILES, maps in output atom order.
std::string format_reaction(const Reaction &rxn);
void write_reactions(std::ostream &out, const std::vector<Reaction> &rxns);
void save_reactions(const std::string &path,
                    const std::vector<Reaction> &rxns);

struct Featurized {
  Tensor adjacency;  // n x n x kNumBondTypes
  Tensor features;   // n x kAtomFeatureDim
};

Featurized featurize(const Molecule &mol);

}  // namespace dualretro

#endif  // DUALRETRO_CHEM_DATASET_H_
