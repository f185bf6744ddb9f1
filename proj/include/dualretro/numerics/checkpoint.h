//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_NUMERICS_CHECKPOINT_H_
#define DUALRETRO_NUMERICS_CHECKPOINT_H_

#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dualretro/numerics/tape.h"

namespace dualretro {

class CheckpointError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parameters plus free-form string metadata (model hyperparameters).
//
// Text format, version 1:
//
//   dualretro-checkpoint 1
//   meta <count>
//   <key> <value...>                  one line per entry, keys sorted
//   params <count>
//   <name> <ndim> <dim0> ... <dimN>   one header per parameter
//   <v0> <v1> ...                     values as C99 hex floats, row-major
//   end
//
// Hex floats make the round trip bit-exact.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  ParameterSet params;
};

void write_checkpoint(std::ostream &os, const Checkpoint &ckpt);
Checkpoint read_checkpoint(std::istream &is);

void save_checkpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::string &path);

}  // namespace dualretro

#endif  // DUALRETRO_NUMERICS_CHECKPOINT_H_
