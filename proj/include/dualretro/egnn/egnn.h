//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_EGNN_EGNN_H_
#define DUALRETRO_EGNN_EGNN_H_

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualretro/chem/molecule.h"
#include "dualretro/diffusion/diffusion.h"
#include "dualretro/numerics/checkpoint.h"
#include "dualretro/numerics/optim.h"

namespace dualretro {

class NoCoordinates: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Diffused atom features: element slot one-hot.
inline constexpr int kDiffusionFeatureDim = 10;
// Conditioning channels of synthon atoms: element one-hot plus a flag for
// the atoms that lost a bond at the reaction center.
inline constexpr int kContextDim = kDiffusionFeatureDim + 1;

struct EgnnConfig {
  int layers = 3;
  int hidden = 32;
  int feature_dim = kDiffusionFeatureDim;
  int context_dim = kContextDim;
  int T = 100;  // steps of the schedule, used to embed t / T
};

ParameterSet init_egnn_params(const EgnnConfig &config, Rng &rng);

struct EgnnOutput {
  Var x;    // e^(x),L, n x 3
  Var h;    // e^(h),L, n x feature_dim
  Var eps;  // [e^(x),L - z^(x), e^(h),L]
};

// L message-passing layers over all ordered atom pairs. Input features are
// [z^(h), t / T, S flag, context] mapped to the hidden width; outputs are
// mapped back to feature_dim. Coordinates of S atoms are never updated.
EgnnOutput egnn_forward(Tape &tape, const ParameterSet &params,
                        const EgnnConfig &config, const DiffusionState &z,
                        int t);

EpsModel make_eps_model(const ParameterSet &params, const EgnnConfig &config);

struct EquivarianceReport {
  int trials = 0;
  double max_coord_error = 0.0;
  double max_feature_error = 0.0;
  int reflections = 0;  // trials whose U had determinant -1
  bool passed = false;
};

// Random orthogonal U from the QR factorization of a Gaussian matrix and a
// random translation per trial; compares f(Ux + t) with U f(x) + t.
EquivarianceReport check_equivariance(const ParameterSet &params,
                                      const EgnnConfig &config, Rng &rng,
                                      int trials, double tol);

// Random orthogonal 3 x 3 matrix (Haar measure over O(3)).
Tensor random_orthogonal(Rng &rng);

// One-hot element slots of `mol` (n x kDiffusionFeatureDim).
Tensor element_onehot(const Molecule &mol);

// Context rows for a synthon: element one-hot and attachment flag.
Tensor synthon_context(const Molecule &synthon,
                       std::span<const int> attachment_atoms);

struct DenoiserTrainConfig {
  int steps = 10000;
  int batch = 4;
  AdamConfig adam { .lr = 2e-3 };
};

// Adam on the diffusion loss; `data` holds clean states in their centred
// frame. `on_step` may be empty.
std::vector<double> train_denoiser(
    ParameterSet &params, const EgnnConfig &config,
    const NoiseSchedule &schedule, const std::vector<DiffusionState> &data,
    const DenoiserTrainConfig &train, Rng &rng,
    const std::function<void(int, double)> &on_step = {});

// Size classifier: GCN over the fully connected synthon with
// radial-basis distance features, node logits averaged and softmaxed.
struct SizeConfig {
  int layers = 2;
  int hidden = 32;
  int classes = 11;  // 0..10 generated atoms
  int rbf = 16;
  double rbf_max = 8.0;  // Angstrom
  int input_dim = kContextDim;
};

ParameterSet init_size_params(const SizeConfig &config, Rng &rng);

// 1 x classes log-probabilities.
Var size_log_probs(Tape &tape, const ParameterSet &params,
                   const SizeConfig &config, const Tensor &x,
                   const Tensor &features);

Var size_cross_entropy(Tape &tape, const ParameterSet &params,
                       const SizeConfig &config, const Tensor &x,
                       const Tensor &features, int label);

// Probability vector over generated-atom counts. Throws NoCoordinates when
// the synthon has no conformer.
std::vector<double> predict_size(const ParameterSet &params,
                                 const SizeConfig &config,
                                 const Molecule &synthon,
                                 std::span<const int> attachment_atoms);

struct SizeExample {
  Tensor x;
  Tensor features;
  int label = 0;
};

struct SizeTrainConfig {
  int epochs = 60;
  int batch = 8;
  AdamConfig adam { .lr = 3e-3 };
};

std::vector<double> train_size_classifier(ParameterSet &params,
                                          const SizeConfig &config,
                                          const std::vector<SizeExample> &data,
                                          const SizeTrainConfig &train,
                                          Rng &rng);

Checkpoint egnn_checkpoint(const ParameterSet &params,
                           const EgnnConfig &config);
ParameterSet egnn_from_checkpoint(const Checkpoint &ckpt, EgnnConfig &config);
Checkpoint size_checkpoint(const ParameterSet &params,
                           const SizeConfig &config);
ParameterSet size_from_checkpoint(const Checkpoint &ckpt, SizeConfig &config);

}  // namespace dualretro

#endif  // DUALRETRO_EGNN_EGNN_H_
