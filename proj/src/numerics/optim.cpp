//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/numerics/optim.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dualretro/numerics/rng.h"

namespace dualretro {

void adam_step(ParameterSet &params, const std::vector<Tensor> &grads,
               AdamState &state, const AdamConfig &config) {
  if (static_cast<int>(grads.size()) != params.size())
    throw ShapeMismatch("adam_step: gradient count does not match parameters");
  if (state.m.empty()) {
    state.m = params.zeros_like();
    state.v = params.zeros_like();
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, state.step);
  const double bc2 = 1.0 - std::pow(config.beta2, state.step);
  for (int p = 0; p < params.size(); ++p) {
    Tensor &w = params.value(p);
    const Tensor &g = grads[p];
    Tensor &m = state.m[p], &v = state.v[p];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1, vhat = v[k] / bc2;
      w[k] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

Tensor glorot(Rng &rng, int fan_in, int fan_out) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor w = Tensor::matrix(fan_in, fan_out);
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

namespace {
double eval_loss(const LossFn &loss, const ParameterSet &params) {
  Tape tape(false);
  return loss(tape, params).value().item();
}
}  // namespace

GradCheckReport grad_check(const LossFn &loss, ParameterSet &params,
                           const GradCheckOptions &options) {
  Tape tape;
  Var l = loss(tape, params);
  std::vector<Tensor> analytic = tape.backward(l, params);
  return grad_check(loss, params, analytic, options);
}

GradCheckReport grad_check(const LossFn &loss, ParameterSet &params,
                           const std::vector<Tensor> &analytic,
                           const GradCheckOptions &options) {
  GradCheckReport report;
  const double h = options.step;
  for (int p = 0; p < params.size(); ++p) {
    Tensor &w = params.value(p);
    std::size_t stride = 1;
    if (options.max_entries_per_param > 0
        && w.size() > static_cast<std::size_t>(options.max_entries_per_param))
      stride = w.size() / options.max_entries_per_param;

    for (std::size_t k = 0; k < w.size(); k += stride) {
      const double orig = w[k];
      w[k] = orig + h;
      const double fp = eval_loss(loss, params);
      w[k] = orig - h;
      const double fm = eval_loss(loss, params);
      w[k] = orig;

      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[p][k];
      const double abs_err = std::abs(a - numeric);
      const double rel_err =
          abs_err / std::max({ std::abs(a), std::abs(numeric), options.floor });
      ++report.checked;
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel_err > report.max_rel_error || report.worst_entry.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, rel_err);
        std::ostringstream os;
        os << params.name(p) << "[" << k << "] analytic=" << a
           << " numeric=" << numeric;
        if (rel_err >= report.max_rel_error)
          report.worst_entry = os.str();
      }
    }
  }
  report.passed = report.max_rel_error <= options.tol;
  return report;
}

}  // namespace dualretro
