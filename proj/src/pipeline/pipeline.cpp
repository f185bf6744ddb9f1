//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/pipeline/pipeline.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dualretro/chem/conformer.h"
#include "dualretro/chem/element.h"
#include "dualretro/chem/smiles.h"

namespace dualretro {
namespace {
std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string &key, const std::string &value) {
  T out {};
  const char *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("bad value '" + value + "' for " + key);
  return out;
}

bool parse_switch(const std::string &key, const std::string &value) {
  if (value == "on" || value == "true" || value == "1")
    return true;
  if (value == "off" || value == "false" || value == "0")
    return false;
  throw ConfigError("bad value '" + value + "' for " + key
                    + " (expected on or off)");
}

std::vector<int> parse_list(const std::string &key, const std::string &value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Molecule without_maps(Molecule mol) {
  for (int i = 0; i < mol.num_atoms(); ++i)
    mol.atom(i).map = 0;
  return mol;
}

Tensor coords_matrix(const std::vector<Vec3> &xyz) {
  Tensor out = Tensor::matrix(static_cast<int>(xyz.size()), 3);
  for (std::size_t i = 0; i < xyz.size(); ++i)
    for (int k = 0; k < 3; ++k)
      out(static_cast<int>(i), k) = xyz[i][k];
  return out;
}

// Synthon context rows followed by zero rows for the atoms to generate.
Tensor padded_context(const Molecule &fragment, std::span<const int> attach,
                      int num_free) {
  const Tensor ctx = synthon_context(fragment, attach);
  Tensor out = Tensor::matrix(ctx.rows() + num_free, ctx.cols());
  for (int i = 0; i < ctx.rows(); ++i)
    for (int k = 0; k < ctx.cols(); ++k)
      out(i, k) = ctx(i, k);
  return out;
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(v.size()); ++k)
    if (v[k] > v[best])
      best = k;
  return best;
}
}  // namespace

void apply_config_entry(PipelineConfig &c, const std::string &key,
                        const std::string &value) {
  auto i = [&] { return parse_number<int>(key, value); };
  auto d = [&] { return parse_number<double>(key, value); };
  if (key == "seed")
    c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "center.layers")
    c.center.layers = i();
  else if (key == "center.hidden")
    c.center.hidden = i();
  else if (key == "center.mlp_hidden")
    c.center.mlp_hidden = i();
  else if (key == "center.lambda")
    c.center.lambda = d();
  else if (key == "center.dual")
    c.center.use_dual = parse_switch(key, value);
  else if (key == "center.epochs")
    c.center.epochs = i();
  else if (key == "center.batch")
    c.center.batch = i();
  else if (key == "center.lr")
    c.center.adam.lr = d();
  else if (key == "diffusion.T")
    c.egnn.T = i();
  else if (key == "egnn.layers")
    c.egnn.layers = i();
  else if (key == "egnn.hidden")
    c.egnn.hidden = i();
  else if (key == "diffusion.steps")
    c.denoiser.steps = i();
  else if (key == "diffusion.batch")
    c.denoiser.batch = i();
  else if (key == "diffusion.lr")
    c.denoiser.adam.lr = d();
  else if (key == "size.layers")
    c.size.layers = i();
  else if (key == "size.hidden")
    c.size.hidden = i();
  else if (key == "size.epochs")
    c.size_train.epochs = i();
  else if (key == "size.batch")
    c.size_train.batch = i();
  else if (key == "size.lr")
    c.size_train.adam.lr = d();
  else if (key == "inference.samples")
    c.inference.samples = i();
  else if (key == "inference.centers")
    c.inference.centers = i();
  else if (key == "inference.topk")
    c.inference.topk = parse_list(key, value);
  else
    throw ConfigError("unknown config key '" + key + "'");
}

void read_config(std::istream &in, PipelineConfig &config) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number)
                        + ": expected key = value");
    try {
      apply_config_entry(config, trim(line.substr(0, eq)),
                         trim(line.substr(eq + 1)));
    } catch (const ConfigError &e) {
      throw ConfigError("config line " + std::to_string(number) + ": "
                        + e.what());
    }
  }
}

void load_config(const std::string &path, PipelineConfig &config) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path);
  read_config(in, config);
}

void validate_config(const PipelineConfig &c) {
  auto need = [](bool ok, const char *what) {
    if (!ok)
      throw ConfigError(what);
  };
  need(c.center.layers >= 1, "center.layers must be >= 1");
  need(c.center.hidden >= 1, "center.hidden must be >= 1");
  need(c.center.mlp_hidden >= 1, "center.mlp_hidden must be >= 1");
  need(c.center.lambda > 0.0, "center.lambda must be > 0");
  need(c.center.epochs >= 0, "center.epochs must be >= 0");
  need(c.center.batch >= 1, "center.batch must be >= 1");
  need(c.center.adam.lr > 0.0, "center.lr must be > 0");
  need(c.egnn.T >= 2, "diffusion.T must be >= 2");
  need(c.egnn.layers >= 1, "egnn.layers must be >= 1");
  need(c.egnn.hidden >= 1, "egnn.hidden must be >= 1");
  need(c.denoiser.steps >= 0, "diffusion.steps must be >= 0");
  need(c.denoiser.batch >= 1, "diffusion.batch must be >= 1");
  need(c.denoiser.adam.lr > 0.0, "diffusion.lr must be > 0");
  need(c.size.layers >= 1, "size.layers must be >= 1");
  need(c.size.hidden >= 1, "size.hidden must be >= 1");
  need(c.size_train.epochs >= 0, "size.epochs must be >= 0");
  need(c.size_train.batch >= 1, "size.batch must be >= 1");
  need(c.size_train.adam.lr > 0.0, "size.lr must be > 0");
  need(c.inference.samples >= 1, "inference.samples must be >= 1");
  need(c.inference.centers >= 1, "inference.centers must be >= 1");
  need(!c.inference.topk.empty(), "inference.topk must not be empty");
  for (int k: c.inference.topk)
    need(k >= 1, "inference.topk entries must be >= 1");
}

std::vector<std::pair<std::string, std::string>>
config_entries(const PipelineConfig &c) {
  std::string topk;
  for (std::size_t k = 0; k < c.inference.topk.size(); ++k)
    topk += (k ? "," : "") + std::to_string(c.inference.topk[k]);
  return {
    { "seed", std::to_string(c.seed) },
    { "center.layers", std::to_string(c.center.layers) },
    { "center.hidden", std::to_string(c.center.hidden) },
    { "center.mlp_hidden", std::to_string(c.center.mlp_hidden) },
    { "center.lambda", format_double(c.center.lambda) },
    { "center.dual", c.center.use_dual ? "on" : "off" },
    { "center.epochs", std::to_string(c.center.epochs) },
    { "center.batch", std::to_string(c.center.batch) },
    { "center.lr", format_double(c.center.adam.lr) },
    { "diffusion.T", std::to_string(c.egnn.T) },
    { "egnn.layers", std::to_string(c.egnn.layers) },
    { "egnn.hidden", std::to_string(c.egnn.hidden) },
    { "diffusion.steps", std::to_string(c.denoiser.steps) },
    { "diffusion.batch", std::to_string(c.denoiser.batch) },
    { "diffusion.lr", format_double(c.denoiser.adam.lr) },
    { "size.layers", std::to_string(c.size.layers) },
    { "size.hidden", std::to_string(c.size.hidden) },
    { "size.epochs", std::to_string(c.size_train.epochs) },
    { "size.batch", std::to_string(c.size_train.batch) },
    { "size.lr", format_double(c.size_train.adam.lr) },
    { "inference.samples", std::to_string(c.inference.samples) },
    { "inference.centers", std::to_string(c.inference.centers) },
    { "inference.topk", topk },
  };
}

Molecule with_conformer(const Molecule &mol) {
  Molecule out = mol;
  if (out.has_coords())
    return out;
  Rng rng(hash_string(canonical_smiles(mol)));
  out.set_coords(embed_conformer(out, rng));
  return out;
}

CenterExample center_example(const Reaction &rxn) {
  return { prepare_center_graph(rxn.product), derive_center_labels(rxn) };
}

std::vector<int> attachment_atoms(const Synthon &synthon) {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(synthon.atom_ids.size()); ++k) {
    const int id = synthon.atom_ids[k];
    if (id == synthon.broken_bond.first || id == synthon.broken_bond.second)
      out.push_back(k);
  }
  return out;
}

std::vector<SynthonSample> synthon_samples(const Reaction &rxn) {
  const Molecule product = with_conformer(rxn.product);
  const auto bonds = center_bonds(derive_center_labels(rxn));
  if (bonds.empty())
    throw InvalidReaction("reaction has no center bond");
  const auto index = reactant_map_index(rxn.reactants);
  std::unordered_set<int> product_maps;
  for (const Atom &a: product.atoms())
    product_maps.insert(a.map);
  const Rng base(hash_string(canonical_smiles(product)));

  std::vector<SynthonSample> out;
  const auto synthons = extract_synthons(product, bonds.front());
  for (std::size_t s = 0; s < synthons.size(); ++s) {
    const Synthon &syn = synthons[s];
    SynthonSample sample;
    sample.tmpl = make_template(syn);
    sample.attachments = attachment_atoms(syn);
    const Molecule &frag = sample.tmpl.fragment;
    const int ns = frag.num_atoms();

    std::unordered_map<int, int> local;  // map number -> synthon index
    for (int k = 0; k < ns; ++k)
      local[product.atom(syn.atom_ids[k]).map] = k;
    const int r = index.at(product.atom(syn.atom_ids.front()).map).molecule;
    const Molecule &reactant = rxn.reactants[r];
    std::vector<std::optional<Vec3>> fixed(reactant.num_atoms());
    std::vector<int> q;
    int found = 0;
    for (int a = 0; a < reactant.num_atoms(); ++a) {
      const int map = reactant.atom(a).map;
      const auto it = map > 0 ? local.find(map) : local.end();
      if (it != local.end()) {
        fixed[a] = frag.coords()[it->second];
        ++found;
      } else if (map > 0 && product_maps.count(map)) {
        throw InvalidReaction("a reactant spans several synthons");
      } else {
        q.push_back(a);
      }
    }
    if (found != ns)
      throw InvalidReaction("a synthon spans several reactants");
    Rng rng = base.fork(s);
    const std::vector<Vec3> xyz = embed_conformer(reactant, rng, {}, fixed);

    const int n = ns + static_cast<int>(q.size());
    DiffusionState z;
    z.x = Tensor::matrix(n, 3);
    z.h = Tensor::matrix(n, kDiffusionFeatureDim);
    z.fixed.assign(n, 0);
    const Tensor onehot = element_onehot(frag);
    for (int i = 0; i < ns; ++i) {
      for (int k = 0; k < 3; ++k)
        z.x(i, k) = frag.coords()[i][k];
      for (int k = 0; k < kDiffusionFeatureDim; ++k)
        z.h(i, k) = onehot(i, k);
      z.fixed[i] = 1;
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
      const int i = ns + static_cast<int>(k);
      for (int c = 0; c < 3; ++c)
        z.x(i, c) = xyz[q[k]][c];
      const int element = reactant.atom(q[k]).element;
      z.h(i, element_slot(element)) = 1.0;
      sample.q_elements.push_back(element);
    }
    z.context = padded_context(frag, sample.attachments,
                               static_cast<int>(q.size()));
    center_frame(z);
    sample.z0 = std::move(z);
    sample.reactant = without_maps(reactant);
    out.push_back(std::move(sample));
  }
  return out;
}

SizeExample size_example(const SynthonSample &sample) {
  SizeExample ex;
  ex.x = coords_matrix(sample.tmpl.fragment.coords());
  ex.features = synthon_context(sample.tmpl.fragment, sample.attachments);
  ex.label = static_cast<int>(sample.q_elements.size());
  return ex;
}

std::string reactant_set_key(const Reaction &rxn) {
  std::vector<Molecule> mols;
  for (const Molecule &m: rxn.reactants)
    mols.push_back(without_maps(m));
  return canonical_smiles_set(mols);
}

DiffusionTrainData diffusion_train_data(const std::vector<Reaction> &corpus) {
  DiffusionTrainData data;
  for (const Reaction &rxn: corpus) {
    for (SynthonSample &s: synthon_samples(rxn)) {
      data.sizes.push_back(size_example(s));
      if (!s.q_elements.empty())
        data.states.push_back(std::move(s.z0));
    }
  }
  return data;
}

Candidate sample_synthon(const SynthonTemplate &tmpl,
                         std::span<const int> attachments, int num_free,
                         const Models &models, const NoiseSchedule &schedule,
                         Rng &rng, const StepCallback &on_step) {
  if (num_free == 0)
    return complete_reactant(tmpl, {}, {});
  const Molecule &frag = tmpl.fragment;
  const int ns = frag.num_atoms();
  SampleRequest req;
  req.x_fixed = coords_matrix(frag.coords());
  req.h_fixed = element_onehot(frag);
  req.num_free = num_free;
  req.feature_dim = models.egnn_config.feature_dim;
  req.context = padded_context(frag, attachments, num_free);
  const DiffusionState z =
      sample(req, make_eps_model(models.egnn, models.egnn_config), schedule,
             rng, on_step);

  std::vector<int> elements(num_free);
  std::vector<Vec3> xyz(num_free);
  std::vector<double> row(z.feature_dim());
  for (int k = 0; k < num_free; ++k) {
    for (int c = 0; c < z.feature_dim(); ++c)
      row[c] = z.h(ns + k, c);
    const int slot = argmax(row);
    elements[k] = slot < kNumElementSlots ? slot_element(slot) : 0;
    for (int c = 0; c < 3; ++c)
      xyz[k][c] = z.x(ns + k, c);
  }
  return complete_reactant(tmpl, elements, xyz);
}

PredictionRecord predict(const Molecule &input, const Models &models,
                         const InferenceConfig &config, std::uint64_t seed) {
  const Molecule product = with_conformer(without_maps(input));
  PredictionRecord rec;
  rec.product = canonical_smiles(product);
  rec.samples = config.samples;

  const CenterGraph graph = prepare_center_graph(product);
  const auto ranked = rank_centers(models.center, models.center_config, graph);
  const int b_max = std::min<int>(config.centers, ranked.size());
  if (b_max == 0)
    throw NoValidCandidate("product has no bonds to disconnect");
  rec.centers.assign(ranked.begin(), ranked.begin() + b_max);

  // Chains in proportion to the center scores, remainder to the top one.
  double total = 0.0;
  for (const ScoredBond &b: rec.centers)
    total += b.score;
  rec.chains.assign(b_max, 0);
  int used = 0;
  for (int b = 0; b < b_max && total > 0.0; ++b) {
    rec.chains[b] = static_cast<int>(config.samples * rec.centers[b].score
                                     / total);
    used += rec.chains[b];
  }
  rec.chains[0] += config.samples - used;

  const NoiseSchedule schedule = build_schedule(models.egnn_config.T);
  const Rng base(seed ^ hash_string(rec.product));
  std::map<std::string, int> counts;
  std::vector<std::string> first_seen;
  std::uint64_t chain = 0;
  for (int b = 0; b < b_max; ++b) {
    const auto synthons =
        extract_synthons(product, { rec.centers[b].i, rec.centers[b].j });
    std::vector<SynthonTemplate> tmpls;
    std::vector<std::vector<int>> attach;
    std::vector<int> sizes;
    for (const Synthon &s: synthons) {
      tmpls.push_back(make_template(s));
      attach.push_back(attachment_atoms(s));
      sizes.push_back(argmax(predict_size(models.size, models.size_config,
                                          tmpls.back().fragment,
                                          attach.back())));
      rec.sizes.push_back(sizes.back());
    }
    for (int c = 0; c < rec.chains[b]; ++c) {
      Rng rng = base.fork(chain++);
      std::vector<Molecule> mols;
      bool ok = true;
      for (std::size_t s = 0; s < tmpls.size(); ++s) {
        Candidate cand = sample_synthon(tmpls[s], attach[s], sizes[s], models,
                                        schedule, rng);
        ok = ok && cand.valid;
        mols.push_back(std::move(cand.molecule));
      }
      if (!ok)
        continue;
      ++rec.valid;
      const std::string key = canonical_smiles_set(mols);
      if (counts[key]++ == 0)
        first_seen.push_back(key);
    }
  }
  if (rec.valid == 0)
    throw NoValidCandidate("no valid candidate for " + rec.product);
  for (const std::string &key: first_seen)
    rec.candidates.push_back({ key, counts[key] });
  std::stable_sort(rec.candidates.begin(), rec.candidates.end(),
                   [](const RankedCandidate &a, const RankedCandidate &b) {
                     return a.count > b.count;
                   });
  return rec;
}

EvalRow evaluate(const std::vector<Reaction> &corpus, const Models &models,
                 const InferenceConfig &config, std::uint64_t seed,
                 const std::string &label,
                 const std::function<void(const PredictionRecord &)>
                     &on_record) {
  EvalRow row;
  row.label = label;
  row.k = config.topk;
  row.accuracy.assign(row.k.size(), 0.0);
  row.records = static_cast<int>(corpus.size());
  int center_hits = 0;
  for (const Reaction &rxn: corpus) {
    const auto truth_bonds = center_bonds(derive_center_labels(rxn));
    PredictionRecord rec;
    try {
      rec = predict(rxn.product, models, config, seed);
    } catch (const NoValidCandidate &) {
      rec.product = canonical_smiles(without_maps(rxn.product));
      ++row.no_candidate;
    }
    const auto ranked =
        rank_centers(models.center, models.center_config,
                     prepare_center_graph(rxn.product));
    if (!ranked.empty() && !truth_bonds.empty()
        && std::make_pair(ranked[0].i, ranked[0].j) == truth_bonds.front())
      ++center_hits;
    rec.truth = reactant_set_key(rxn);
    for (std::size_t r = 0; r < rec.candidates.size(); ++r)
      if (rec.candidates[r].reactants == *rec.truth) {
        rec.hit_rank = static_cast<int>(r) + 1;
        break;
      }
    for (std::size_t k = 0; k < row.k.size(); ++k)
      if (rec.hit_rank > 0 && rec.hit_rank <= row.k[k])
        row.accuracy[k] += 1.0;
    if (on_record)
      on_record(rec);
  }
  if (row.records > 0) {
    for (double &a: row.accuracy)
      a /= row.records;
    row.center_top1 = static_cast<double>(center_hits) / row.records;
  }
  return row;
}

std::string record_json(const PredictionRecord &rec) {
  nlohmann::ordered_json j;
  j["product"] = rec.product;
  j["centers"] = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < rec.centers.size(); ++b)
    j["centers"].push_back({ { "bond", { rec.centers[b].i, rec.centers[b].j } },
                             { "score", rec.centers[b].score },
                             { "chains", rec.chains[b] } });
  j["sizes"] = rec.sizes;
  j["samples"] = rec.samples;
  j["valid"] = rec.valid;
  j["candidates"] = nlohmann::ordered_json::array();
  for (const RankedCandidate &c: rec.candidates)
    j["candidates"].push_back({ { "reactants", c.reactants },
                                { "count", c.count } });
  if (rec.truth) {
    j["truth"] = *rec.truth;
    j["hit_rank"] = rec.hit_rank;
  }
  return j.dump();
}

std::string eval_json(const EvalRow &row) {
  nlohmann::ordered_json j;
  j["label"] = row.label;
  j["records"] = row.records;
  nlohmann::ordered_json acc = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < row.k.size(); ++k)
    acc["top" + std::to_string(row.k[k])] = row.accuracy[k];
  j["accuracy"] = acc;
  j["center_top1"] = row.center_top1;
  j["no_candidate"] = row.no_candidate;
  return j.dump();
}

}  // namespace dualretro
