//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_PIPELINE_TOY_H_
#define DUALRETRO_PIPELINE_TOY_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "dualretro/chem/reaction.h"
#include "dualretro/numerics/rng.h"

namespace dualretro {

class UnknownRule: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Bond-forming templates of the toy corpus. Each joins an electrophile
// (leaving group, then the reactive atom) and a nucleophile (reactive atom
// first) with one new single bond; the leaving group is dropped.
std::vector<std::string> toy_rule_names();

// `n` atom-mapped reactions drawn from the named rules. Every (electrophile,
// nucleophile) pair is used once before any repeats; the order is a seeded
// shuffle. Leaving-group atoms are unmapped. Throws UnknownRule for an
// unknown name and std::invalid_argument for an empty list or n < 0.
std::vector<Reaction> gen_toy_corpus(const std::vector<std::string> &rules,
                                     int n, Rng &rng);

// Checks one generated record: the reaction validates and exactly one
// product bond is labelled as the center. Throws InvalidReaction otherwise.
void check_toy_reaction(const Reaction &rxn);

}  // namespace dualretro

#endif  // DUALRETRO_PIPELINE_TOY_H_
