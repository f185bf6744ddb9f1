//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/centernet/centernet.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "dualretro/faces/faces.h"

namespace dualretro {
namespace {
std::string layer_name(const char *graph, int layer, const std::string &w) {
  return std::string(graph) + ".l" + std::to_string(layer) + "." + w;
}

std::vector<RgcnLayer> bind_rgcn(Tape &tape, const ParameterSet &params,
                                 const char *graph, int layers) {
  std::vector<RgcnLayer> out(layers);
  for (int l = 0; l < layers; ++l) {
    for (int r = 0; r < kNumBondTypes; ++r)
      out[l].w_rel[r] = tape.parameter(
          params, layer_name(graph, l, "w" + std::to_string(r)));
    out[l].w_self = tape.parameter(params, layer_name(graph, l, "self"));
  }
  return out;
}

void add_rgcn_params(ParameterSet &params, Rng &rng, const char *graph,
                     int layers, int in, int hidden) {
  for (int l = 0; l < layers; ++l) {
    const int fan_in = l == 0 ? in : hidden;
    for (int r = 0; r < kNumBondTypes; ++r)
      params.add(layer_name(graph, l, "w" + std::to_string(r)),
                 glorot(rng, fan_in, hidden));
    params.add(layer_name(graph, l, "self"), glorot(rng, fan_in, hidden));
  }
}

std::vector<std::pair<int, int>> ordered_pairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        pairs.emplace_back(i, j);
  return pairs;
}

void require_trained(const ParameterSet &params) {
  if (params.empty())
    throw NotTrained("center model has no parameters");
}
}  // namespace

CenterGraph prepare_center_graph(const Molecule &mol) {
  if (mol.empty())
    throw EmptyGraph("molecule has no atoms");
  CenterGraph g;
  g.num_atoms = mol.num_atoms();
  g.x = atom_features(mol);
  for (int k = 0; k < mol.num_bonds(); ++k) {
    const Bond &b = mol.bond(k);
    const int r = static_cast<int>(b.type);
    g.bonds.src[r].push_back(b.src);
    g.bonds.dst[r].push_back(b.dst);
    g.bonds.src[r].push_back(b.dst);
    g.bonds.dst[r].push_back(b.src);
    g.bond_pairs.emplace_back(std::min(b.src, b.dst), std::max(b.src, b.dst));
    g.bond_type.push_back(r);
  }

  const DualGraph dual = build_dual(mol);
  g.num_faces = dual.num_faces();
  g.x_dual = dual_node_features(g.x, dual);
  for (const DualEdge &e: dual.edges) {
    g.dual.src[e.type].push_back(e.a);
    g.dual.dst[e.type].push_back(e.b);
    g.dual.src[e.type].push_back(e.b);
    g.dual.dst[e.type].push_back(e.a);
  }
  for (int i = 0; i < g.num_atoms; ++i) {
    for (int f: dual.membership[i]) {
      g.member_atom.push_back(i);
      g.member_face.push_back(f);
    }
  }
  return g;
}

std::vector<Var> rgcn_forward(Var h0, const RelationEdges &edges, int nodes,
                              std::span<const RgcnLayer> layers,
                              Activation act) {
  std::vector<Var> out;
  Var h = h0;
  for (const RgcnLayer &layer: layers) {
    Var z = matmul(h, layer.w_self);
    for (int r = 0; r < kNumBondTypes; ++r) {
      if (edges.src[r].empty())
        continue;
      const Var agg = scatter_add_rows(gather_rows(h, edges.src[r]),
                                       edges.dst[r], nodes);
      z = z + matmul(agg, layer.w_rel[r]);
    }
    h = act == Activation::kRelu ? relu(z) : z;
    out.push_back(h);
  }
  return out;
}

ParameterSet init_center_params(const CenterConfig &config, Rng &rng) {
  ParameterSet p;
  const int hd = config.hidden;
  add_rgcn_params(p, rng, "mol", config.layers, kAtomFeatureDim, hd);
  if (config.use_dual)
    add_rgcn_params(p, rng, "dual", config.layers, kAtomFeatureDim, hd);
  p.add("readout.w", glorot(rng, hd, hd));
  p.add("readout.b", Tensor::matrix(1, hd));
  p.add("edge.wa", glorot(rng, 3 * hd, config.mlp_hidden));
  p.add("edge.wb", glorot(rng, 3 * hd, config.mlp_hidden));
  p.add("edge.wc", glorot(rng, kNumBondTypes, config.mlp_hidden));
  p.add("edge.b1", Tensor::matrix(1, config.mlp_hidden));
  // Zero output layer: an untrained model scores every pair 0.5.
  p.add("edge.w2", Tensor::matrix(config.mlp_hidden, 1));
  p.add("edge.b2", Tensor::matrix(1, 1));
  return p;
}

CenterEmbeddings center_embed(Tape &tape, const ParameterSet &params,
                              const CenterConfig &config,
                              const CenterGraph &graph) {
  require_trained(params);
  if (graph.num_atoms == 0)
    throw EmptyGraph("molecule has no atoms");
  const int n = graph.num_atoms;
  CenterEmbeddings e;

  const auto mol_layers = bind_rgcn(tape, params, "mol", config.layers);
  e.h = rgcn_forward(tape.constant(graph.x), graph.bonds, n, mol_layers,
                     Activation::kRelu)
            .back();

  if (config.use_dual) {
    const auto dual_layers = bind_rgcn(tape, params, "dual", config.layers);
    e.d = rgcn_forward(tape.constant(graph.x_dual), graph.dual,
                       graph.num_faces, dual_layers, Activation::kRelu)
              .back();
    e.face_sum = scatter_add_rows(gather_rows(e.d, graph.member_face),
                                  graph.member_atom, n);
  } else {
    e.face_sum = tape.constant(Tensor::matrix(n, config.hidden));
  }

  e.h_mol = sigmoid(affine(mean_rows(e.h),
                           tape.parameter(params, "readout.w"),
                           tape.parameter(params, "readout.b")));
  e.fused = concat_cols({ e.h, e.face_sum, repeat_rows(e.h_mol, n) });
  return e;
}

Var pair_scores(Tape &tape, const ParameterSet &params,
                const CenterConfig &config, const CenterGraph &graph,
                Var fused, std::span<const std::pair<int, int>> pairs) {
  (void)config;
  const int p = static_cast<int>(pairs.size());
  // Both orientations of every pair are scored; rows [p, 2p) are reversed.
  std::vector<int> first(2 * p), second(2 * p);
  Tensor bond_onehot = Tensor::matrix(2 * p, kNumBondTypes);
  const int n = graph.num_atoms;
  std::vector<int> type_at(static_cast<std::size_t>(n) * n, -1);
  for (std::size_t k = 0; k < graph.bond_pairs.size(); ++k) {
    const auto [i, j] = graph.bond_pairs[k];
    type_at[static_cast<std::size_t>(i) * n + j] = graph.bond_type[k];
    type_at[static_cast<std::size_t>(j) * n + i] = graph.bond_type[k];
  }
  for (int k = 0; k < p; ++k) {
    const auto [i, j] = pairs[k];
    first[k] = i;
    second[k] = j;
    first[p + k] = j;
    second[p + k] = i;
    const int t = type_at[static_cast<std::size_t>(i) * n + j];
    if (t >= 0) {
      bond_onehot(k, t) = 1.0;
      bond_onehot(p + k, t) = 1.0;
    }
  }

  const Var a = matmul(fused, tape.parameter(params, "edge.wa"));
  const Var b = matmul(fused, tape.parameter(params, "edge.wb"));
  Var pre = gather_rows(a, first) + gather_rows(b, second);
  pre = pre + matmul(tape.constant(std::move(bond_onehot)),
                     tape.parameter(params, "edge.wc"));
  pre = add_row(pre, tape.parameter(params, "edge.b1"));
  const Var logits = affine(silu(pre), tape.parameter(params, "edge.w2"),
                            tape.parameter(params, "edge.b2"));
  const Var s = sigmoid(logits);

  std::vector<int> fwd(p), rev(p);
  std::iota(fwd.begin(), fwd.end(), 0);
  std::iota(rev.begin(), rev.end(), p);
  return scale(gather_rows(s, fwd) + gather_rows(s, rev), 0.5);
}

Var center_loss(Var scores, std::span<const double> labels, double lambda) {
  if (static_cast<int>(labels.size()) != scores.rows() || scores.cols() != 1)
    throw std::invalid_argument("center_loss: labels do not match scores");
  // Positive and negative terms are split so that a saturated score on the
  // correct side contributes an exact zero instead of 0 * log(0).
  std::vector<int> pos, neg;
  const Tensor &s = scores.value();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != 0.0 && labels[k] != 1.0)
      throw std::invalid_argument("center_loss: labels must be 0 or 1");
    const bool positive = labels[k] == 1.0;
    const double arg = positive ? s[k] : 1.0 - s[k];
    if (!(arg > 0.0) || !(s[k] >= 0.0 && s[k] <= 1.0))
      throw DomainError("center_loss: score outside (0, 1)");
    (positive ? pos : neg).push_back(static_cast<int>(k));
  }
  Tape &tape = *scores.tape();
  Var total = tape.constant(Tensor::scalar(0.0));
  if (!pos.empty())
    total = total + scale(sum(log(gather_rows(scores, pos))), -lambda);
  if (!neg.empty()) {
    const Var complement = add_scalar(scale(gather_rows(scores, neg), -1.0),
                                      1.0);
    total = total - sum(log(complement));
  }
  return total;
}

Var reaction_center_loss(Tape &tape, const ParameterSet &params,
                         const CenterConfig &config, const CenterGraph &graph,
                         const Tensor &labels) {
  const int n = graph.num_atoms;
  if (labels.rows() != n || labels.cols() != n)
    throw std::invalid_argument("label matrix does not match the molecule");
  const CenterEmbeddings e = center_embed(tape, params, config, graph);
  if (n < 2)
    return tape.constant(Tensor::scalar(0.0));
  const auto pairs = ordered_pairs(n);
  std::vector<double> y(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k)
    y[k] = labels(pairs[k].first, pairs[k].second);
  return center_loss(pair_scores(tape, params, config, graph, e.fused, pairs),
                     y, config.lambda);
}

std::vector<ScoredBond> rank_centers(const ParameterSet &params,
                                     const CenterConfig &config,
                                     const CenterGraph &graph) {
  require_trained(params);
  std::vector<ScoredBond> out;
  if (graph.bond_pairs.empty())
    return out;
  Tape tape(false);
  const CenterEmbeddings e = center_embed(tape, params, config, graph);
  const Var s =
      pair_scores(tape, params, config, graph, e.fused, graph.bond_pairs);
  for (std::size_t k = 0; k < graph.bond_pairs.size(); ++k)
    out.push_back({ graph.bond_pairs[k].first, graph.bond_pairs[k].second,
                    s.value()[k] });
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredBond &a, const ScoredBond &b) {
                     if (a.score != b.score)
                       return a.score > b.score;
                     return std::tie(a.i, a.j) < std::tie(b.i, b.j);
                   });
  return out;
}

CenterTrainLog train_center(ParameterSet &params, const CenterConfig &config,
                            const std::vector<CenterExample> &data, Rng &rng,
                            const std::function<void(int, double)> &on_epoch) {
  require_trained(params);
  CenterTrainLog log;
  AdamState state;
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, config.batch);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      Tape tape;
      Var total = tape.constant(Tensor::scalar(0.0));
      for (std::size_t k = start; k < end; ++k) {
        const CenterExample &ex = data[order[k]];
        total = total
                + reaction_center_loss(tape, params, config, ex.graph,
                                       ex.labels);
      }
      const Var loss = scale(total, 1.0 / static_cast<double>(end - start));
      epoch_loss += loss.value().item() * static_cast<double>(end - start);
      adam_step(params, tape.backward(loss, params), state, config.adam);
    }
    epoch_loss /= std::max<std::size_t>(1, data.size());
    log.epoch_loss.push_back(epoch_loss);
    if (on_epoch)
      on_epoch(epoch, epoch_loss);
  }
  return log;
}

double center_top1_accuracy(const ParameterSet &params,
                            const CenterConfig &config,
                            const std::vector<CenterExample> &data) {
  if (data.empty())
    return 0.0;
  int hits = 0;
  for (const CenterExample &ex: data) {
    const auto ranked = rank_centers(params, config, ex.graph);
    if (!ranked.empty() && ex.labels(ranked[0].i, ranked[0].j) == 1.0)
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

Checkpoint center_checkpoint(const ParameterSet &params,
                             const CenterConfig &config) {
  Checkpoint c;
  c.meta["model"] = "center";
  c.meta["layers"] = std::to_string(config.layers);
  c.meta["hidden"] = std::to_string(config.hidden);
  c.meta["mlp_hidden"] = std::to_string(config.mlp_hidden);
  c.meta["dual"] = config.use_dual ? "on" : "off";
  c.params = params;
  return c;
}

ParameterSet center_from_checkpoint(const Checkpoint &ckpt,
                                    CenterConfig &config) {
  const auto it = ckpt.meta.find("model");
  if (it == ckpt.meta.end() || it->second != "center")
    throw CheckpointError("checkpoint does not hold a center model");
  config.layers = std::stoi(ckpt.meta.at("layers"));
  config.hidden = std::stoi(ckpt.meta.at("hidden"));
  config.mlp_hidden = std::stoi(ckpt.meta.at("mlp_hidden"));
  config.use_dual = ckpt.meta.at("dual") == "on";
  return ckpt.params;
}

}  // namespace dualretro
