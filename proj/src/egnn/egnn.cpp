//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/egnn/egnn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dualretro/chem/element.h"

namespace dualretro {
namespace {
constexpr int kCoordDim = 3;

void add_mlp(ParameterSet &p, Rng &rng, const std::string &prefix, int in,
             int hidden, int out, double out_gain = 1.0) {
  p.add(prefix + ".w1", glorot(rng, in, hidden));
  p.add(prefix + ".b1", Tensor::matrix(1, hidden));
  Tensor w2 = glorot(rng, hidden, out);
  for (double &v: w2.values())
    v *= out_gain;
  p.add(prefix + ".w2", std::move(w2));
  p.add(prefix + ".b2", Tensor::matrix(1, out));
}

// Two-layer SiLU perceptron; `act_out` adds a SiLU after the second layer.
Var mlp(Tape &tape, const ParameterSet &p, const std::string &prefix, Var in,
        bool act_out) {
  const Var hidden = silu(affine(in, tape.parameter(p, prefix + ".w1"),
                                 tape.parameter(p, prefix + ".b1")));
  const Var out = affine(hidden, tape.parameter(p, prefix + ".w2"),
                         tape.parameter(p, prefix + ".b2"));
  return act_out ? silu(out) : out;
}

struct PairIndex {
  std::vector<int> first;
  std::vector<int> second;
};

PairIndex all_pairs(int n) {
  PairIndex idx;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        idx.first.push_back(i);
        idx.second.push_back(j);
      }
  return idx;
}

Tensor rbf_features(const Tensor &x, const PairIndex &pairs, int k,
                    double max_dist) {
  const int p = static_cast<int>(pairs.first.size());
  Tensor out = Tensor::matrix(p, k);
  const double width = max_dist / std::max(1, k - 1);
  for (int e = 0; e < p; ++e) {
    double d2 = 0.0;
    for (int c = 0; c < kCoordDim; ++c) {
      const double d = x(pairs.first[e], c) - x(pairs.second[e], c);
      d2 += d * d;
    }
    const double d = std::sqrt(d2);
    for (int b = 0; b < k; ++b) {
      const double u = (d - b * width) / width;
      out(e, b) = std::exp(-0.5 * u * u);
    }
  }
  return out;
}

Tensor apply_transform(const Tensor &x, const Tensor &u, const double *t) {
  Tensor out = Tensor::matrix(x.rows(), kCoordDim);
  for (int i = 0; i < x.rows(); ++i)
    for (int a = 0; a < kCoordDim; ++a) {
      double v = t ? t[a] : 0.0;
      for (int b = 0; b < kCoordDim; ++b)
        v += u(a, b) * x(i, b);
      out(i, a) = v;
    }
  return out;
}

int meta_int(const Checkpoint &c, const char *key) {
  const auto it = c.meta.find(key);
  if (it == c.meta.end())
    throw CheckpointError(std::string("checkpoint lacks '") + key + "'");
  return std::stoi(it->second);
}

void require_model(const Checkpoint &c, const char *name) {
  const auto it = c.meta.find("model");
  if (it == c.meta.end() || it->second != name)
    throw CheckpointError(std::string("checkpoint does not hold a ") + name
                          + " model");
}
}  // namespace

ParameterSet init_egnn_params(const EgnnConfig &config, Rng &rng) {
  ParameterSet p;
  const int hd = config.hidden;
  const int in = config.feature_dim + 2 + config.context_dim;
  p.add("in.w", glorot(rng, in, hd));
  p.add("in.b", Tensor::matrix(1, hd));
  for (int l = 0; l < config.layers; ++l) {
    const std::string s = "l" + std::to_string(l);
    add_mlp(p, rng, s + ".e", 2 * hd + 1, hd, hd);
    add_mlp(p, rng, s + ".h", 2 * hd, hd, hd);
    // Small coordinate steps at initialization keep early training stable.
    add_mlp(p, rng, s + ".r", 2 * hd, hd, 1, 1e-2);
  }
  p.add("out.w", glorot(rng, hd, config.feature_dim));
  p.add("out.b", Tensor::matrix(1, config.feature_dim));
  return p;
}

EgnnOutput egnn_forward(Tape &tape, const ParameterSet &params,
                        const EgnnConfig &config, const DiffusionState &z,
                        int t) {
  const int n = z.num_atoms();
  if (n == 0)
    throw std::invalid_argument("egnn_forward: no atoms");
  Tensor in = Tensor::matrix(n, config.feature_dim + 2 + config.context_dim);
  std::vector<char> moves(n, 0);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (int k = 0; k < config.feature_dim; ++k)
      in(i, c++) = z.h(i, k);
    in(i, c++) = static_cast<double>(t) / static_cast<double>(config.T);
    in(i, c++) = z.fixed[i] ? 1.0 : 0.0;
    for (int k = 0; k < config.context_dim && k < z.context.cols(); ++k)
      in(i, c + k) = z.context(i, k);
    moves[i] = z.fixed[i] ? 0 : 1;
  }

  const Var x0 = tape.constant(z.x);
  Var x = x0;
  Var e = affine(tape.constant(std::move(in)), tape.parameter(params, "in.w"),
                 tape.parameter(params, "in.b"));
  const PairIndex pairs = all_pairs(n);
  for (int l = 0; l < config.layers; ++l) {
    const std::string s = "l" + std::to_string(l);
    if (pairs.first.empty()) {
      // A single atom has no messages: e' = phi_h(e, 0).
      const Var none = tape.constant(Tensor::matrix(n, config.hidden));
      e = mlp(tape, params, s + ".h", concat_cols({ e, none }), false);
      continue;
    }
    const Var d = gather_rows(x, pairs.first) - gather_rows(x, pairs.second);
    const Var d2 = row_sqnorm(d);
    const Var ei = gather_rows(e, pairs.first);
    const Var ej = gather_rows(e, pairs.second);
    const Var m = mlp(tape, params, s + ".e", concat_cols({ ei, ej, d2 }), true);
    const Var agg = scatter_add_rows(m, pairs.first, n);
    const Var w = mlp(tape, params, s + ".r", concat_cols({ ei, ej }), false);
    const Var step = mul_col(d, w * reciprocal(add_scalar(d2, 1.0)));
    const Var moved = x + scatter_add_rows(step, pairs.first, n);
    e = mlp(tape, params, s + ".h", concat_cols({ e, agg }), false);
    x = select_rows(x, moved, moves);
  }
  EgnnOutput out;
  out.x = x;
  out.h = affine(e, tape.parameter(params, "out.w"),
                 tape.parameter(params, "out.b"));
  out.eps = concat_cols({ x - x0, out.h });
  return out;
}

EpsModel make_eps_model(const ParameterSet &params, const EgnnConfig &config) {
  return [&params, config](Tape &tape, const DiffusionState &z, int t) {
    return egnn_forward(tape, params, config, z, t).eps;
  };
}

Tensor random_orthogonal(Rng &rng) {
  Tensor g = gaussian(rng, { 3, 3 });
  // Gram-Schmidt on columns; the implied R has a positive diagonal, so the
  // result is Haar distributed over O(3).
  Tensor q = Tensor::matrix(3, 3);
  for (int c = 0; c < 3; ++c) {
    double v[3] = { g(0, c), g(1, c), g(2, c) };
    for (int p = 0; p < c; ++p) {
      double dot = 0.0;
      for (int r = 0; r < 3; ++r)
        dot += v[r] * q(r, p);
      for (int r = 0; r < 3; ++r)
        v[r] -= dot * q(r, p);
    }
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (int r = 0; r < 3; ++r)
      q(r, c) = v[r] / norm;
  }
  return q;
}

EquivarianceReport check_equivariance(const ParameterSet &params,
                                      const EgnnConfig &config, Rng &rng,
                                      int trials, double tol) {
  EquivarianceReport rep;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = rng.uniform_int(2, 9);
    DiffusionState z;
    z.x = gaussian(rng, { n, 3 });
    for (double &v: z.x.values())
      v *= 2.0;
    z.h = gaussian(rng, { n, config.feature_dim });
    z.fixed.assign(n, 0);
    z.context = Tensor::matrix(n, config.context_dim);
    for (int i = 0; i < n; ++i) {
      z.fixed[i] = rng.uniform() < 0.4 ? 1 : 0;
      if (z.fixed[i])
        for (int k = 0; k < config.context_dim; ++k)
          z.context(i, k) = rng.uniform();
    }
    const int t = rng.uniform_int(1, config.T);
    const Tensor u = random_orthogonal(rng);
    const double shift[3] = { 5.0 * rng.gaussian(), 5.0 * rng.gaussian(),
                              5.0 * rng.gaussian() };
    const double det = u(0, 0) * (u(1, 1) * u(2, 2) - u(1, 2) * u(2, 1))
                       - u(0, 1) * (u(1, 0) * u(2, 2) - u(1, 2) * u(2, 0))
                       + u(0, 2) * (u(1, 0) * u(2, 1) - u(1, 1) * u(2, 0));
    rep.reflections += det < 0.0 ? 1 : 0;

    Tape tape(false);
    const EgnnOutput a = egnn_forward(tape, params, config, z, t);
    DiffusionState zt = z;
    zt.x = apply_transform(z.x, u, shift);
    const EgnnOutput b = egnn_forward(tape, params, config, zt, t);

    const Tensor expect = apply_transform(a.x.value(), u, shift);
    for (std::size_t k = 0; k < expect.size(); ++k)
      rep.max_coord_error = std::max(
          rep.max_coord_error, std::abs(expect[k] - b.x.value()[k]));
    for (std::size_t k = 0; k < a.h.value().size(); ++k)
      rep.max_feature_error =
          std::max(rep.max_feature_error,
                   std::abs(a.h.value()[k] - b.h.value()[k]));
    ++rep.trials;
  }
  rep.passed = rep.max_coord_error <= tol && rep.max_feature_error <= tol;
  return rep;
}

Tensor element_onehot(const Molecule &mol) {
  Tensor out = Tensor::matrix(mol.num_atoms(), kDiffusionFeatureDim);
  for (int i = 0; i < mol.num_atoms(); ++i)
    out(i, element_slot(mol.atom(i).element)) = 1.0;
  return out;
}

Tensor synthon_context(const Molecule &synthon,
                       std::span<const int> attachment_atoms) {
  Tensor out = Tensor::matrix(synthon.num_atoms(), kContextDim);
  const Tensor onehot = element_onehot(synthon);
  for (int i = 0; i < synthon.num_atoms(); ++i)
    for (int k = 0; k < kDiffusionFeatureDim; ++k)
      out(i, k) = onehot(i, k);
  for (int a: attachment_atoms)
    out(a, kDiffusionFeatureDim) = 1.0;
  return out;
}

std::vector<double> train_denoiser(
    ParameterSet &params, const EgnnConfig &config,
    const NoiseSchedule &schedule, const std::vector<DiffusionState> &data,
    const DenoiserTrainConfig &train, Rng &rng,
    const std::function<void(int, double)> &on_step) {
  std::vector<double> losses;
  if (data.empty())
    return losses;
  AdamState state;
  const EpsModel model = make_eps_model(params, config);
  const int batch = std::max(1, train.batch);
  for (int step = 0; step < train.steps; ++step) {
    Tape tape;
    Var total = tape.constant(Tensor::scalar(0.0));
    for (int b = 0; b < batch; ++b) {
      const int k = rng.uniform_int(0, static_cast<int>(data.size()) - 1);
      total = total + diffusion_loss(tape, model, data[k], schedule, rng);
    }
    const Var loss = scale(total, 1.0 / batch);
    losses.push_back(loss.value().item());
    adam_step(params, tape.backward(loss, params), state, train.adam);
    if (on_step)
      on_step(step, losses.back());
  }
  return losses;
}

ParameterSet init_size_params(const SizeConfig &config, Rng &rng) {
  ParameterSet p;
  const int hd = config.hidden;
  p.add("in.w", glorot(rng, config.input_dim, hd));
  p.add("in.b", Tensor::matrix(1, hd));
  for (int l = 0; l < config.layers; ++l) {
    const std::string s = "l" + std::to_string(l);
    add_mlp(p, rng, s + ".m", 2 * hd + config.rbf, hd, hd);
    add_mlp(p, rng, s + ".u", 2 * hd, hd, hd);
  }
  p.add("out.w", glorot(rng, hd, config.classes));
  p.add("out.b", Tensor::matrix(1, config.classes));
  return p;
}

Var size_log_probs(Tape &tape, const ParameterSet &params,
                   const SizeConfig &config, const Tensor &x,
                   const Tensor &features) {
  const int n = x.rows();
  if (n == 0)
    throw std::invalid_argument("size classifier: empty synthon");
  const PairIndex pairs = all_pairs(n);
  const Var rbf =
      tape.constant(rbf_features(x, pairs, config.rbf, config.rbf_max));
  Var h = silu(affine(tape.constant(features), tape.parameter(params, "in.w"),
                      tape.parameter(params, "in.b")));
  for (int l = 0; l < config.layers; ++l) {
    const std::string s = "l" + std::to_string(l);
    Var agg = tape.constant(Tensor::matrix(n, config.hidden));
    if (!pairs.first.empty()) {
      const Var m = mlp(tape, params, s + ".m",
                        concat_cols({ gather_rows(h, pairs.first),
                                      gather_rows(h, pairs.second), rbf }),
                        true);
      agg = scatter_add_rows(m, pairs.first, n);
    }
    h = mlp(tape, params, s + ".u", concat_cols({ h, agg }), true);
  }
  const Var logits = mean_rows(affine(h, tape.parameter(params, "out.w"),
                                      tape.parameter(params, "out.b")));
  return log_softmax_rows(logits);
}

Var size_cross_entropy(Tape &tape, const ParameterSet &params,
                       const SizeConfig &config, const Tensor &x,
                       const Tensor &features, int label) {
  if (label < 0 || label >= config.classes)
    throw std::out_of_range("size label " + std::to_string(label)
                            + " outside the class range");
  const std::vector<int> pick = { label };
  return scale(
      select_cols(size_log_probs(tape, params, config, x, features), pick),
      -1.0);
}

std::vector<double> predict_size(const ParameterSet &params,
                                 const SizeConfig &config,
                                 const Molecule &synthon,
                                 std::span<const int> attachment_atoms) {
  if (!synthon.has_coords())
    throw NoCoordinates("synthon has no 3D coordinates");
  Tensor x = Tensor::matrix(synthon.num_atoms(), kCoordDim);
  for (int i = 0; i < synthon.num_atoms(); ++i)
    for (int k = 0; k < kCoordDim; ++k)
      x(i, k) = synthon.coords()[i][k];
  Tape tape(false);
  const Tensor lp = size_log_probs(tape, params, config, x,
                                   synthon_context(synthon, attachment_atoms))
                        .value();
  std::vector<double> prob(config.classes);
  for (int c = 0; c < config.classes; ++c)
    prob[c] = std::exp(lp[c]);
  return prob;
}

std::vector<double> train_size_classifier(ParameterSet &params,
                                          const SizeConfig &config,
                                          const std::vector<SizeExample> &data,
                                          const SizeTrainConfig &train,
                                          Rng &rng) {
  std::vector<double> epoch_loss;
  AdamState state;
  std::vector<int> order(data.size());
  for (std::size_t k = 0; k < order.size(); ++k)
    order[k] = static_cast<int>(k);
  const std::size_t batch = std::max(1, train.batch);
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    rng.shuffle(order);
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      Tape tape;
      Var total = tape.constant(Tensor::scalar(0.0));
      for (std::size_t k = start; k < end; ++k) {
        const SizeExample &ex = data[order[k]];
        total = total
                + size_cross_entropy(tape, params, config, ex.x, ex.features,
                                     ex.label);
      }
      const Var loss = scale(total, 1.0 / static_cast<double>(end - start));
      total_loss += loss.value().item() * static_cast<double>(end - start);
      adam_step(params, tape.backward(loss, params), state, train.adam);
    }
    epoch_loss.push_back(total_loss / std::max<std::size_t>(1, data.size()));
  }
  return epoch_loss;
}

Checkpoint egnn_checkpoint(const ParameterSet &params,
                           const EgnnConfig &config) {
  Checkpoint c;
  c.meta["model"] = "egnn";
  c.meta["layers"] = std::to_string(config.layers);
  c.meta["hidden"] = std::to_string(config.hidden);
  c.meta["feature_dim"] = std::to_string(config.feature_dim);
  c.meta["context_dim"] = std::to_string(config.context_dim);
  c.meta["T"] = std::to_string(config.T);
  c.params = params;
  return c;
}

ParameterSet egnn_from_checkpoint(const Checkpoint &ckpt, EgnnConfig &config) {
  require_model(ckpt, "egnn");
  config.layers = meta_int(ckpt, "layers");
  config.hidden = meta_int(ckpt, "hidden");
  config.feature_dim = meta_int(ckpt, "feature_dim");
  config.context_dim = meta_int(ckpt, "context_dim");
  config.T = meta_int(ckpt, "T");
  return ckpt.params;
}

Checkpoint size_checkpoint(const ParameterSet &params,
                           const SizeConfig &config) {
  Checkpoint c;
  c.meta["model"] = "size";
  c.meta["layers"] = std::to_string(config.layers);
  c.meta["hidden"] = std::to_string(config.hidden);
  c.meta["classes"] = std::to_string(config.classes);
  c.meta["rbf"] = std::to_string(config.rbf);
  c.meta["input_dim"] = std::to_string(config.input_dim);
  c.params = params;
  return c;
}

ParameterSet size_from_checkpoint(const Checkpoint &ckpt, SizeConfig &config) {
  require_model(ckpt, "size");
  config.layers = meta_int(ckpt, "layers");
  config.hidden = meta_int(ckpt, "hidden");
  config.classes = meta_int(ckpt, "classes");
  config.rbf = meta_int(ckpt, "rbf");
  config.input_dim = meta_int(ckpt, "input_dim");
  return ckpt.params;
}

}  // namespace dualretro
