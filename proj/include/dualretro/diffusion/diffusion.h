//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_DIFFUSION_DIFFUSION_H_
#define DUALRETRO_DIFFUSION_DIFFUSION_H_

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dualretro/numerics/ops.h"
#include "dualretro/numerics/rng.h"

namespace dualretro {

class BadT: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class StepOutOfRange: public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

class SizeTooSmall: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Variance-preserving polynomial schedule,
// alpha_t = (1 - 2s) (1 - ((t - 1) / (T - 1))^2) for t >= 1, alpha_0 = 1,
// sigma_t = sqrt(1 - alpha_t^2).
struct NoiseSchedule {
  int T = 0;
  double s = 1e-5;
  std::vector<double> alpha;  // T + 1 entries
  std::vector<double> sigma;

  // alpha_t^2 / sigma_t^2; infinite at t = 0.
  double snr(int t) const;
};

NoiseSchedule build_schedule(int T, double s = 1e-5);

// Latent of every atom: coordinates x (n x 3, Angstrom) and continuous
// features h (n x d). Rows with fixed[i] set belong to the synthon S, whose
// coordinates and features are never noised or moved. `context` holds clean conditioning
// channels (n x c) that the denoiser reads but that are not diffused.
struct DiffusionState {
  Tensor x;
  Tensor h;
  std::vector<char> fixed;
  Tensor context;

  int num_atoms() const { return x.rows(); }
  int feature_dim() const { return h.cols(); }
  int num_fixed() const;
};

// [x, h] as one n x (3 + d) matrix, the layout of noise and predictions.
Tensor pack(const Tensor &x, const Tensor &h);
void unpack(const Tensor &packed, Tensor &x, Tensor &h);

// 1 on the rows of free atoms, 0 on the rows of fixed atoms.
Tensor free_mask(const DiffusionState &z);

// Moves the frame so that the fixed atoms' centroid (all atoms when nothing
// is fixed) sits at the origin; returns the subtracted offset.
std::array<double, 3> center_frame(DiffusionState &z);

struct NoisedState {
  DiffusionState z;  // z_t
  Tensor eps;        // n x (3 + d), zero on fixed rows
};

// z_t = alpha_t z_0 + sigma_t eps on the free rows; fixed rows are copied
// from z_0. With nothing fixed the coordinate noise is projected
// to zero mean. Throws StepOutOfRange unless 1 <= t <= T.
NoisedState forward_noise(const DiffusionState &z0,
                          const NoiseSchedule &schedule, int t, Rng &rng);

// q(z_{t-1} | z_t, z_0) = N(c_zt z_t + c_z0 z_0, variance I).
struct Posterior {
  double c_zt = 0.0;
  double c_z0 = 0.0;
  double variance = 0.0;
};

// Throws StepOutOfRange unless 1 < t <= T.
Posterior posterior(const NoiseSchedule &schedule, int t);
Tensor posterior_mean(const Posterior &q, const Tensor &zt, const Tensor &z0);

// z0_hat = (z_t - sigma_t eps_hat) / alpha_t; zero when alpha_t = 0.
Tensor predict_z0(const NoiseSchedule &schedule, int t, const Tensor &zt,
                  const Tensor &eps_hat);

// KL(N(mu_a, var_a I) || N(mu_b, var_b I)) over all entries.
double gaussian_kl(const Tensor &mu_a, double var_a, const Tensor &mu_b,
                   double var_b);

// (1/2) (snr(t - 1) - snr(t)) ||z0_hat - z0||^2, the same KL written as a
// weighted reconstruction error.
double weighted_z0_error(const NoiseSchedule &schedule, int t,
                         const Tensor &z0_hat, const Tensor &z0);

// Noise predictor: n x (3 + d) prediction for state z_t at step t.
using EpsModel =
    std::function<Var(Tape &tape, const DiffusionState &zt, int t)>;

// ||(eps_hat - eps) * mask||^2 for a given corruption.
Var diffusion_loss_at(Tape &tape, const EpsModel &model,
                      const NoisedState &noised, int t);

// Same with t ~ U{1..T} and fresh noise drawn from rng.
Var diffusion_loss(Tape &tape, const EpsModel &model,
                   const DiffusionState &z0, const NoiseSchedule &schedule,
                   Rng &rng);

// Conditioning for the reverse process: the synthon occupies rows
// [0, |S|), the generated atoms the remaining num_free rows.
struct SampleRequest {
  Tensor x_fixed;  // |S| x 3
  Tensor h_fixed;  // |S| x d, held fixed like the coordinates
  int num_free = 0;
  int feature_dim = 0;
  Tensor context;  // (|S| + num_free) x c, may have zero columns
};

using StepCallback = std::function<void(int t, const DiffusionState &z)>;

// Ancestral sampling from t = T down to 1. Steps t > 1 draw
// z_{t-1} ~ N(mu(z_t, z0_hat), sigma_q^2(t) I); the last step returns
// z0_hat. Fixed rows are copied from the request at every step and
// in the result. `on_step` receives z_t in the request's frame. Throws
// SizeTooSmall when num_free < 0.
DiffusionState sample(const SampleRequest &request, const EpsModel &model,
                      const NoiseSchedule &schedule, Rng &rng,
                      const StepCallback &on_step = {});

}  // namespace dualretro

#endif  // DUALRETRO_DIFFUSION_DIFFUSION_H_
