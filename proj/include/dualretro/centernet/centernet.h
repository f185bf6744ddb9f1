//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_CENTERNET_CENTERNET_H_
#define DUALRETRO_CENTERNET_CENTERNET_H_

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dualretro/chem/molecule.h"
#include "dualretro/numerics/checkpoint.h"
#include "dualretro/numerics/ops.h"
#include "dualretro/numerics/optim.h"
#include "dualretro/numerics/rng.h"

namespace dualretro {

class NotTrained: public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class DomainError: public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class EmptyGraph: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct CenterConfig {
  int layers = 3;
  int hidden = 64;
  int mlp_hidden = 64;
  double lambda = 20.0;  // weight on positive pairs in the loss
  bool use_dual = true;
  int epochs = 40;
  int batch = 8;
  AdamConfig adam { .lr = 3e-3 };
};

// Directed message lists per relation: messages flow src[k] -> dst[k].
struct RelationEdges {
  std::array<std::vector<int>, kNumBondTypes> src;
  std::array<std::vector<int>, kNumBondTypes> dst;
};

// Everything the model reads from one molecule, precomputed once.
struct CenterGraph {
  int num_atoms = 0;
  Tensor x;             // n x kAtomFeatureDim
  RelationEdges bonds;  // both directions of every bond
  int num_faces = 0;
  Tensor x_dual;        // faces x kAtomFeatureDim
  RelationEdges dual;   // both directions of every dual edge
  // Flattened F_i: (member_atom[k], member_face[k]) pairs.
  std::vector<int> member_atom;
  std::vector<int> member_face;
  std::vector<std::pair<int, int>> bond_pairs;  // (i, j), i < j
  std::vector<int> bond_type;                   // per bond_pairs entry
};

CenterGraph prepare_center_graph(const Molecule &mol);

enum class Activation { kRelu, kIdentity };

struct RgcnLayer {
  std::array<Var, kNumBondTypes> w_rel;
  Var w_self;
};

// h^l = act(sum_r sum_{j in N_i^r} h_j^{l-1} W_r + h_i^{l-1} W_0); returns
// h^1..h^L.
std::vector<Var> rgcn_forward(Var h0, const RelationEdges &edges, int nodes,
                              std::span<const RgcnLayer> layers,
                              Activation act);

ParameterSet init_center_params(const CenterConfig &config, Rng &rng);

struct CenterEmbeddings {
  Var h;       // H^L, n x hidden
  Var d;       // D^L, faces x hidden (invalid in ablation mode)
  Var h_mol;   // 1 x hidden graph embedding
  Var face_sum;  // n x hidden, sum of D^L over F_i (zeros in ablation)
  Var fused;   // n x 3 hidden
};

CenterEmbeddings center_embed(Tape &tape, const ParameterSet &params,
                              const CenterConfig &config,
                              const CenterGraph &graph);

// Symmetrized scores (s_ij + s_ji) / 2 for the given ordered pairs, p x 1.
Var pair_scores(Tape &tape, const ParameterSet &params,
                const CenterConfig &config, const CenterGraph &graph,
                Var fused, std::span<const std::pair<int, int>> pairs);

// -sum_p [lambda y_p log s_p + (1 - y_p) log(1 - s_p)] over the given
// scores (p x 1) and 0/1 labels (p entries). Throws DomainError when a
// needed logarithm argument leaves (0, 1].
Var center_loss(Var scores, std::span<const double> labels, double lambda);

// Loss of one reaction over all ordered pairs i != j, labels from Y.
Var reaction_center_loss(Tape &tape, const ParameterSet &params,
                         const CenterConfig &config, const CenterGraph &graph,
                         const Tensor &labels);

struct ScoredBond {
  int i;
  int j;
  double score;
};

// Existing bonds by descending score, ties by (i, j). Throws NotTrained on
// an empty parameter set.
std::vector<ScoredBond> rank_centers(const ParameterSet &params,
                                     const CenterConfig &config,
                                     const CenterGraph &graph);

struct CenterExample {
  CenterGraph graph;
  Tensor labels;  // Y
};

struct CenterTrainLog {
  std::vector<double> epoch_loss;
};

// Adam over shuffled mini-batches; each batch loss is the mean over its
// reactions. `on_epoch` may be empty.
CenterTrainLog train_center(ParameterSet &params, const CenterConfig &config,
                            const std::vector<CenterExample> &data, Rng &rng,
                            const std::function<void(int, double)> &on_epoch = {});

// Fraction of examples whose top-ranked bond is a labelled center.
double center_top1_accuracy(const ParameterSet &params,
                            const CenterConfig &config,
                            const std::vector<CenterExample> &data);

Checkpoint center_checkpoint(const ParameterSet &params,
                             const CenterConfig &config);
// Restores the architecture fields of `config` from the checkpoint meta.
ParameterSet center_from_checkpoint(const Checkpoint &ckpt,
                                    CenterConfig &config);

}  // namespace dualretro

#endif  // DUALRETRO_CENTERNET_CENTERNET_H_
