//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/diffusion/diffusion.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dualretro {
namespace {
constexpr int kCoordDim = 3;

void require_step(const NoiseSchedule &schedule, int t, int lo) {
  if (t < lo || t > schedule.T)
    throw StepOutOfRange("diffusion step " + std::to_string(t)
                         + " outside [" + std::to_string(lo) + ", "
                         + std::to_string(schedule.T) + "]");
}

void project_free_coords_to_zero_mean(Tensor &packed,
                                      const std::vector<char> &fixed) {
  double mean[kCoordDim] = { 0.0, 0.0, 0.0 };
  int count = 0;
  for (int i = 0; i < packed.rows(); ++i) {
    if (fixed[i])
      continue;
    ++count;
    for (int k = 0; k < kCoordDim; ++k)
      mean[k] += packed(i, k);
  }
  if (count == 0)
    return;
  for (int i = 0; i < packed.rows(); ++i) {
    if (fixed[i])
      continue;
    for (int k = 0; k < kCoordDim; ++k)
      packed(i, k) -= mean[k] / count;
  }
}

bool any_fixed(const std::vector<char> &fixed) {
  for (char f: fixed)
    if (f)
      return true;
  return false;
}
}  // namespace

double NoiseSchedule::snr(int t) const {
  if (sigma[t] == 0.0)
    return std::numeric_limits<double>::infinity();
  return alpha[t] * alpha[t] / (sigma[t] * sigma[t]);
}

NoiseSchedule build_schedule(int T, double s) {
  if (T < 2)
    throw BadT("diffusion needs T >= 2, got " + std::to_string(T));
  NoiseSchedule sch;
  sch.T = T;
  sch.s = s;
  sch.alpha.assign(T + 1, 0.0);
  sch.sigma.assign(T + 1, 0.0);
  sch.alpha[0] = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double u = static_cast<double>(t - 1) / static_cast<double>(T - 1);
    sch.alpha[t] = (1.0 - 2.0 * s) * (1.0 - u * u);
    sch.sigma[t] = std::sqrt(1.0 - sch.alpha[t] * sch.alpha[t]);
  }
  return sch;
}

int DiffusionState::num_fixed() const {
  int c = 0;
  for (char f: fixed)
    c += f ? 1 : 0;
  return c;
}

Tensor pack(const Tensor &x, const Tensor &h) {
  const int n = x.rows(), d = h.cols();
  Tensor out = Tensor::matrix(n, kCoordDim + d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kCoordDim; ++k)
      out(i, k) = x(i, k);
    for (int k = 0; k < d; ++k)
      out(i, kCoordDim + k) = h(i, k);
  }
  return out;
}

void unpack(const Tensor &packed, Tensor &x, Tensor &h) {
  const int n = packed.rows(), d = packed.cols() - kCoordDim;
  x = Tensor::matrix(n, kCoordDim);
  h = Tensor::matrix(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kCoordDim; ++k)
      x(i, k) = packed(i, k);
    for (int k = 0; k < d; ++k)
      h(i, k) = packed(i, kCoordDim + k);
  }
}

Tensor free_mask(const DiffusionState &z) {
  Tensor m = Tensor::matrix(z.num_atoms(), kCoordDim + z.feature_dim(), 1.0);
  for (int i = 0; i < z.num_atoms(); ++i)
    if (z.fixed[i])
      for (int k = 0; k < m.cols(); ++k)
        m(i, k) = 0.0;
  return m;
}

std::array<double, 3> center_frame(DiffusionState &z) {
  std::array<double, 3> c = { 0.0, 0.0, 0.0 };
  const bool use_fixed = any_fixed(z.fixed);
  int count = 0;
  for (int i = 0; i < z.num_atoms(); ++i) {
    if (use_fixed && !z.fixed[i])
      continue;
    ++count;
    for (int k = 0; k < kCoordDim; ++k)
      c[k] += z.x(i, k);
  }
  if (count == 0)
    return c;
  for (double &v: c)
    v /= count;
  for (int i = 0; i < z.num_atoms(); ++i)
    for (int k = 0; k < kCoordDim; ++k)
      z.x(i, k) -= c[k];
  return c;
}

NoisedState forward_noise(const DiffusionState &z0,
                          const NoiseSchedule &schedule, int t, Rng &rng) {
  require_step(schedule, t, 1);
  const int n = z0.num_atoms(), w = kCoordDim + z0.feature_dim();
  NoisedState out;
  out.eps = gaussian(rng, { n, w });
  const Tensor mask = free_mask(z0);
  for (std::size_t k = 0; k < out.eps.size(); ++k)
    out.eps[k] *= mask[k];
  if (!any_fixed(z0.fixed))
    project_free_coords_to_zero_mean(out.eps, z0.fixed);

  const double a = schedule.alpha[t], s = schedule.sigma[t];
  Tensor zt = pack(z0.x, z0.h);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < w; ++k) {
      if (z0.fixed[i])
        continue;  // copied bit-exact from z_0
      zt(i, k) = a * zt(i, k) + s * out.eps(i, k);
    }
  }
  out.z.fixed = z0.fixed;
  out.z.context = z0.context;
  unpack(zt, out.z.x, out.z.h);
  for (int i = 0; i < n; ++i)
    if (z0.fixed[i]) {
      for (int k = 0; k < kCoordDim; ++k)
        out.z.x(i, k) = z0.x(i, k);
      for (int k = 0; k < z0.feature_dim(); ++k)
        out.z.h(i, k) = z0.h(i, k);
    }
  return out;
}

Posterior posterior(const NoiseSchedule &schedule, int t) {
  require_step(schedule, t, 2);
  const double a_t = schedule.alpha[t], a_s = schedule.alpha[t - 1];
  const double v_t = schedule.sigma[t] * schedule.sigma[t];
  const double v_s = schedule.sigma[t - 1] * schedule.sigma[t - 1];
  const double a_ts = a_t / a_s;
  const double v_ts = v_t - a_ts * a_ts * v_s;
  Posterior q;
  q.c_zt = a_ts * v_s / v_t;
  q.c_z0 = a_s * v_ts / v_t;
  q.variance = v_s - a_t * a_t * v_s * v_s / (a_s * a_s * v_t);
  return q;
}

Tensor posterior_mean(const Posterior &q, const Tensor &zt, const Tensor &z0) {
  Tensor out = zt;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = q.c_zt * zt[k] + q.c_z0 * z0[k];
  return out;
}

Tensor predict_z0(const NoiseSchedule &schedule, int t, const Tensor &zt,
                  const Tensor &eps_hat) {
  require_step(schedule, t, 1);
  Tensor out = Tensor(zt.shape());
  const double a = schedule.alpha[t], s = schedule.sigma[t];
  if (a == 0.0)
    return out;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (zt[k] - s * eps_hat[k]) / a;
  return out;
}

double gaussian_kl(const Tensor &mu_a, double var_a, const Tensor &mu_b,
                   double var_b) {
  double sq = 0.0;
  for (std::size_t k = 0; k < mu_a.size(); ++k) {
    const double d = mu_a[k] - mu_b[k];
    sq += d * d;
  }
  const double dim = static_cast<double>(mu_a.size());
  return 0.5
         * (dim * (std::log(var_b / var_a) + var_a / var_b - 1.0)
            + sq / var_b);
}

double weighted_z0_error(const NoiseSchedule &schedule, int t,
                         const Tensor &z0_hat, const Tensor &z0) {
  require_step(schedule, t, 2);
  double sq = 0.0;
  for (std::size_t k = 0; k < z0.size(); ++k) {
    const double d = z0_hat[k] - z0[k];
    sq += d * d;
  }
  return 0.5 * (schedule.snr(t - 1) - schedule.snr(t)) * sq;
}

Var diffusion_loss_at(Tape &tape, const EpsModel &model,
                      const NoisedState &noised, int t) {
  const Var pred = model(tape, noised.z, t);
  const Var diff = (pred - tape.constant(noised.eps))
                   * tape.constant(free_mask(noised.z));
  return sum(diff * diff);
}

Var diffusion_loss(Tape &tape, const EpsModel &model,
                   const DiffusionState &z0, const NoiseSchedule &schedule,
                   Rng &rng) {
  const int t = rng.uniform_int(1, schedule.T);
  return diffusion_loss_at(tape, model, forward_noise(z0, schedule, t, rng),
                           t);
}

DiffusionState sample(const SampleRequest &request, const EpsModel &model,
                      const NoiseSchedule &schedule, Rng &rng,
                      const StepCallback &on_step) {
  if (request.num_free < 0)
    throw SizeTooSmall("requested fewer atoms than the synthon holds");
  const int ns = request.x_fixed.rows();
  const int n = ns + request.num_free;
  const int d = request.feature_dim;
  const int w = kCoordDim + d;

  DiffusionState out;
  out.fixed.assign(n, 0);
  for (int i = 0; i < ns; ++i)
    out.fixed[i] = 1;
  out.context = request.context;
  if (request.num_free == 0) {
    out.x = request.x_fixed;
    out.h = request.h_fixed;
    return out;
  }

  // Work in the frame centred on the synthon.
  double c[kCoordDim] = { 0.0, 0.0, 0.0 };
  for (int i = 0; i < ns; ++i)
    for (int k = 0; k < kCoordDim; ++k)
      c[k] += request.x_fixed(i, k) / ns;
  Tensor fixed_local = Tensor::matrix(std::max(ns, 1), kCoordDim);
  for (int i = 0; i < ns; ++i)
    for (int k = 0; k < kCoordDim; ++k)
      fixed_local(i, k) = request.x_fixed(i, k) - c[k];

  auto draw_noise = [&] {
    Tensor e = gaussian(rng, { n, w });
    for (int i = 0; i < ns; ++i)
      for (int k = 0; k < w; ++k)
        e(i, k) = 0.0;
    if (ns == 0)
      project_free_coords_to_zero_mean(e, out.fixed);
    return e;
  };
  auto reset_fixed = [&](Tensor &z) {
    for (int i = 0; i < ns; ++i) {
      for (int k = 0; k < kCoordDim; ++k)
        z(i, k) = fixed_local(i, k);
      for (int k = 0; k < d; ++k)
        z(i, kCoordDim + k) = request.h_fixed(i, k);
    }
  };
  auto to_state = [&](const Tensor &z, bool request_frame) {
    DiffusionState s;
    s.fixed = out.fixed;
    s.context = request.context;
    unpack(z, s.x, s.h);
    if (request_frame) {
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < kCoordDim; ++k)
          s.x(i, k) = i < ns ? request.x_fixed(i, k) : s.x(i, k) + c[k];
    }
    return s;
  };

  Tensor z = draw_noise();
  reset_fixed(z);
  for (int t = schedule.T; t >= 1; --t) {
    if (on_step)
      on_step(t, to_state(z, true));
    Tensor z0_hat(z.shape());
    if (schedule.alpha[t] != 0.0) {
      Tape tape(false);
      const Tensor eps_hat = model(tape, to_state(z, false), t).value();
      z0_hat = predict_z0(schedule, t, z, eps_hat);
      if (ns == 0)
        project_free_coords_to_zero_mean(z0_hat, out.fixed);
    }
    if (t == 1) {
      z = std::move(z0_hat);
    } else {
      const Posterior q = posterior(schedule, t);
      const Tensor mean = posterior_mean(q, z, z0_hat);
      const Tensor e = draw_noise();
      const double sd = std::sqrt(q.variance);
      for (std::size_t k = 0; k < z.size(); ++k)
        z[k] = mean[k] + sd * e[k];
    }
    reset_fixed(z);
  }
  DiffusionState result = to_state(z, true);
  return result;
}

}  // namespace dualretro
