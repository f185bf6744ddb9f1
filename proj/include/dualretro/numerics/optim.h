//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_NUMERICS_OPTIM_H_
#define DUALRETRO_NUMERICS_OPTIM_H_

#include <functional>
#include <string>
#include <vector>

#include "dualretro/numerics/tape.h"

namespace dualretro {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  int step = 0;
};

void adam_step(ParameterSet &params, const std::vector<Tensor> &grads,
               AdamState &state, const AdamConfig &config);

// Glorot-uniform matrix of shape (fan_in x fan_out).
class Rng;
Tensor glorot(Rng &rng, int fan_in, int fan_out);

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_entry;
  int checked = 0;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tol = 1e-4;
  // Denominator floor of the relative error, so entries whose true gradient
  // is numerically zero are judged by absolute error.
  double floor = 1e-6;
  // Upper bound on entries probed per parameter; 0 probes all of them.
  int max_entries_per_param = 0;
};

// Builds the scalar loss on a fresh tape from the current parameter values.
using LossFn = std::function<Var(Tape &, const ParameterSet &)>;

// Compares reverse-mode gradients against central differences.
GradCheckReport grad_check(const LossFn &loss, ParameterSet &params,
                           const GradCheckOptions &options = {});

// Same, with an explicit analytic gradient (used to inject faulty adjoints).
GradCheckReport grad_check(const LossFn &loss, ParameterSet &params,
                           const std::vector<Tensor> &analytic,
                           const GradCheckOptions &options = {});

}  // namespace dualretro

#endif  // DUALRETRO_NUMERICS_OPTIM_H_
