//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: toy data, both training stages, inference,
// evaluation and inspection.
//

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualretro/chem/dataset.h"
#include "dualretro/chem/smiles.h"
#include "dualretro/faces/faces.h"
#include "dualretro/pipeline/pipeline.h"
#include "dualretro/pipeline/toy.h"

namespace dualretro {
namespace {
using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2 };

// Raised for bad arguments detected after parsing; maps to kUsage.
class UsageError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int samples = -1;
  std::string topk;
  std::string dual;
};

void add_config_flags(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config_path, "key = value config file");
  cmd->add_option("--seed", c.seed, "random seed (overrides the config)")
      ->each([&c](const std::string &) { c.seed_set = true; });
}

PipelineConfig resolve(const Common &c) {
  PipelineConfig cfg;
  if (!c.config_path.empty())
    load_config(c.config_path, cfg);
  if (c.seed_set)
    cfg.seed = c.seed;
  if (c.samples >= 0)
    cfg.inference.samples = c.samples;
  if (!c.topk.empty())
    apply_config_entry(cfg, "inference.topk", c.topk);
  if (!c.dual.empty())
    apply_config_entry(cfg, "center.dual", c.dual);
  validate_config(cfg);
  return cfg;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  return out;
}

Models load_models(const std::string &center, const std::string &egnn,
                   const std::string &size) {
  Models m;
  m.center = center_from_checkpoint(load_checkpoint(center), m.center_config);
  m.egnn = egnn_from_checkpoint(load_checkpoint(egnn), m.egnn_config);
  m.size = size_from_checkpoint(load_checkpoint(size), m.size_config);
  return m;
}

std::pair<int, int> parse_bond(const std::string &text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw UsageError("--bond expects i,j");
  try {
    const int i = std::stoi(text.substr(0, comma));
    const int j = std::stoi(text.substr(comma + 1));
    return { std::min(i, j), std::max(i, j) };
  } catch (const std::logic_error &) {
    throw UsageError("--bond expects i,j");
  }
}

std::vector<std::string> split(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

int run_gen_toy(int n, const std::optional<std::string> &rules,
                const std::string &out_path, const Common &common) {
  const PipelineConfig cfg = resolve(common);
  std::vector<std::string> names = rules ? split(*rules) : toy_rule_names();
  if (names.empty())
    throw UsageError("--rules is empty");
  Rng rng(cfg.seed);
  std::vector<Reaction> corpus;
  try {
    corpus = gen_toy_corpus(names, n, rng);
  } catch (const UnknownRule &e) {
    throw UsageError(e.what());
  }
  if (out_path.empty() || out_path == "-") {
    write_reactions(std::cout, corpus);
  } else {
    std::ofstream out = open_out(out_path);
    write_reactions(out, corpus);
  }
  return kOk;
}

int run_train_center(const std::string &data, const std::string &out_path,
                     const Common &common) {
  const PipelineConfig cfg = resolve(common);
  const std::vector<Reaction> corpus = load_reactions(data);
  std::vector<CenterExample> examples;
  for (const Reaction &rxn: corpus)
    examples.push_back(center_example(rxn));
  Rng rng(cfg.seed);
  ParameterSet params = init_center_params(cfg.center, rng);
  train_center(params, cfg.center, examples, rng, [](int epoch, double loss) {
    std::cout << json { { "epoch", epoch }, { "loss", loss } }.dump() << '\n';
  });
  save_checkpoint(out_path, center_checkpoint(params, cfg.center));
  std::cout << json { { "checkpoint", out_path },
                      { "dual", cfg.center.use_dual },
                      { "train_center_top1",
                        center_top1_accuracy(params, cfg.center, examples) } }
                   .dump()
            << '\n';
  return kOk;
}

int run_train_diffusion(const std::string &data, int limit,
                        const std::string &egnn_path,
                        const std::string &size_path, const Common &common) {
  const PipelineConfig cfg = resolve(common);
  std::vector<Reaction> corpus = load_reactions(data);
  if (limit > 0 && static_cast<int>(corpus.size()) > limit)
    corpus.resize(limit);
  const DiffusionTrainData train = diffusion_train_data(corpus);
  Rng rng(cfg.seed);
  ParameterSet egnn = init_egnn_params(cfg.egnn, rng);
  const NoiseSchedule schedule = build_schedule(cfg.egnn.T);
  train_denoiser(egnn, cfg.egnn, schedule, train.states, cfg.denoiser, rng,
                 [](int step, double loss) {
                   if (step % 100 == 0)
                     std::cout << json { { "step", step }, { "loss", loss } }
                                      .dump()
                               << '\n';
                 });
  save_checkpoint(egnn_path, egnn_checkpoint(egnn, cfg.egnn));
  ParameterSet size = init_size_params(cfg.size, rng);
  const auto size_loss =
      train_size_classifier(size, cfg.size, train.sizes, cfg.size_train, rng);
  save_checkpoint(size_path, size_checkpoint(size, cfg.size));
  std::cout << json { { "egnn_checkpoint", egnn_path },
                      { "size_checkpoint", size_path },
                      { "reactions", corpus.size() },
                      { "states", train.states.size() },
                      { "size_loss",
                        size_loss.empty() ? 0.0 : size_loss.back() } }
                   .dump()
            << '\n';
  return kOk;
}

int run_predict(const std::vector<std::string> &smiles,
                const std::string &data, const std::string &center,
                const std::string &egnn, const std::string &size,
                const Common &common) {
  const PipelineConfig cfg = resolve(common);
  if (smiles.empty() && data.empty())
    throw UsageError("give --smiles or --data");
  const Models models = load_models(center, egnn, size);
  std::vector<Molecule> products;
  for (const std::string &s: smiles) {
    try {
      products.push_back(parse_smiles(s));
    } catch (const SmilesError &e) {
      throw UsageError(std::string("--smiles: ") + e.what());
    }
  }
  if (!data.empty())
    for (const Reaction &rxn: load_reactions(data))
      products.push_back(rxn.product);
  const int keep = *std::max_element(cfg.inference.topk.begin(),
                                     cfg.inference.topk.end());
  int status = kOk;
  for (const Molecule &p: products) {
    try {
      PredictionRecord rec = predict(p, models, cfg.inference, cfg.seed);
      if (static_cast<int>(rec.candidates.size()) > keep)
        rec.candidates.resize(keep);
      std::cout << record_json(rec) << '\n';
    } catch (const NoValidCandidate &e) {
      std::cout << json { { "product", canonical_smiles(p) },
                          { "error", e.what() } }
                       .dump()
                << '\n';
      status = kRuntime;
    }
  }
  return status;
}

int run_evaluate(const std::string &data, const std::string &center,
                 const std::string &egnn, const std::string &size,
                 bool ablation, const std::string &center_ablation,
                 bool records, const Common &common) {
  const PipelineConfig cfg = resolve(common);
  if (ablation && center_ablation.empty())
    throw UsageError("--ablation needs --center-ablation");
  const std::vector<Reaction> corpus = load_reactions(data);
  const Models models = load_models(center, egnn, size);
  auto dump = [&](const PredictionRecord &rec) {
    if (records)
      std::cout << record_json(rec) << '\n';
  };
  std::vector<std::pair<std::string, const Models *>> runs;
  runs.emplace_back(models.center_config.use_dual ? "with-dual" : "without-dual",
                    &models);
  Models other;
  if (ablation) {
    other = models;
    other.center = center_from_checkpoint(load_checkpoint(center_ablation),
                                          other.center_config);
    if (other.center_config.use_dual == models.center_config.use_dual)
      throw UsageError("--center-ablation must differ in dual mode");
    runs.emplace_back(other.center_config.use_dual ? "with-dual"
                                                   : "without-dual",
                      &other);
  }
  for (const auto &[label, m]: runs)
    std::cout << eval_json(evaluate(corpus, *m, cfg.inference, cfg.seed,
                                    label, dump))
              << '\n';
  return kOk;
}

int run_dualgraph(const std::string &smiles) {
  Molecule mol;
  try {
    mol = parse_smiles(smiles);
  } catch (const SmilesError &e) {
    throw UsageError(std::string("--smiles: ") + e.what());
  }
  const DualGraph dual = build_dual(mol);
  json faces = json::array();
  for (const Face &f: dual.face_set.faces)
    faces.push_back({ { "nodes", f.nodes }, { "edges", f.edges },
                      { "outer", f.outer } });
  json edges = json::array();
  for (const DualEdge &e: dual.edges)
    edges.push_back({ { "a", e.a }, { "b", e.b }, { "type", e.type },
                      { "crossed_edge", e.crossed_edge } });
  std::cout << json { { "smiles", canonical_smiles(mol) },
                      { "atoms", mol.num_atoms() },
                      { "bonds", mol.num_bonds() },
                      { "planar", dual.face_set.planar },
                      { "faces", faces },
                      { "dual_edges", edges },
                      { "membership", dual.membership } }
                   .dump()
            << '\n';
  return kOk;
}

int run_sample(const std::string &smiles, const std::string &bond_text,
               int num_atoms, const std::string &center,
               const std::string &egnn, const std::string &size,
               const std::string &dump_path, const Common &common) {
  const PipelineConfig cfg = resolve(common);
  if (bond_text.empty() && center.empty())
    throw UsageError("give --bond or --center");
  Molecule product;
  try {
    product = with_conformer(parse_smiles(smiles));
  } catch (const SmilesError &e) {
    throw UsageError(std::string("--smiles: ") + e.what());
  }
  Models models;
  models.egnn = egnn_from_checkpoint(load_checkpoint(egnn), models.egnn_config);
  models.size = size_from_checkpoint(load_checkpoint(size), models.size_config);
  std::pair<int, int> bond;
  if (!bond_text.empty()) {
    bond = parse_bond(bond_text);
  } else {
    models.center =
        center_from_checkpoint(load_checkpoint(center), models.center_config);
    const auto ranked = rank_centers(models.center, models.center_config,
                                     prepare_center_graph(product));
    if (ranked.empty())
      throw std::runtime_error("product has no bonds");
    bond = { ranked[0].i, ranked[0].j };
  }
  std::vector<Synthon> synthons;
  try {
    synthons = extract_synthons(product, bond);
  } catch (const NotABond &e) {
    throw UsageError(e.what());
  }

  std::ofstream dump;
  if (!dump_path.empty())
    dump = open_out(dump_path);
  const NoiseSchedule schedule = build_schedule(models.egnn_config.T);
  Rng rng(cfg.seed ^ hash_string(canonical_smiles(product)));
  for (std::size_t s = 0; s < synthons.size(); ++s) {
    const SynthonTemplate tmpl = make_template(synthons[s]);
    const std::vector<int> attach = attachment_atoms(synthons[s]);
    int n = num_atoms;
    if (n < 0) {
      const auto prob =
          predict_size(models.size, models.size_config, tmpl.fragment, attach);
      n = static_cast<int>(std::max_element(prob.begin(), prob.end())
                           - prob.begin());
    }
    StepCallback on_step;
    if (dump.is_open())
      on_step = [&](int t, const DiffusionState &z) {
        json x = json::array();
        for (int i = 0; i < z.num_atoms(); ++i)
          x.push_back({ z.x(i, 0), z.x(i, 1), z.x(i, 2) });
        dump << json { { "synthon", s }, { "t", t }, { "x", x } }.dump()
             << '\n';
      };
    const Candidate c =
        sample_synthon(tmpl, attach, n, models, schedule, rng, on_step);
    json out { { "synthon", s },
               { "fragment", canonical_smiles(tmpl.fragment) },
               { "generated", n },
               { "valid", c.valid },
               { "connected", c.connected },
               { "problems", c.problems } };
    if (c.valid)
      out["reactant"] = canonical_smiles(c.molecule);
    std::cout << out.dump() << '\n';
  }
  return kOk;
}
}  // namespace
}  // namespace dualretro

int main(int argc, char **argv) {
  using namespace dualretro;
  CLI::App app { "dualretro: two-stage retrosynthesis on dual graphs" };
  app.require_subcommand(1);
  Common common;
  std::string data, out, center, egnn, size, center_ablation, bond, dump,
      smiles_one;
  std::optional<std::string> rules;
  std::vector<std::string> smiles;
  int n = 200, limit = 0, num_atoms = -1;
  bool ablation = false, records = false;

  auto *gen = app.add_subcommand("gen-toy", "generate the toy corpus");
  gen->add_option("--n", n, "number of reactions")->check(CLI::NonNegativeNumber);
  gen->add_option("--rules", rules, "comma-separated rule names");
  gen->add_option("--out", out, "output file (default stdout)");
  add_config_flags(gen, common);

  auto *tc = app.add_subcommand("train-center", "train the center scorer");
  tc->add_option("--data", data, "reaction corpus")->required();
  tc->add_option("--out", out, "checkpoint path")->required();
  tc->add_option("--dual", common.dual, "dual-graph branch on or off")
      ->check(CLI::IsMember({ "on", "off" }));
  add_config_flags(tc, common);

  auto *td = app.add_subcommand("train-diffusion",
                                "train the denoiser and size classifier");
  td->add_option("--data", data, "reaction corpus")->required();
  td->add_option("--limit", limit, "use only the first N reactions");
  td->add_option("--out-egnn", egnn, "denoiser checkpoint path")->required();
  td->add_option("--out-size", size, "size-classifier checkpoint")->required();
  add_config_flags(td, common);

  auto add_models = [&](CLI::App *cmd) {
    cmd->add_option("--center", center, "center checkpoint")->required();
    cmd->add_option("--egnn", egnn, "denoiser checkpoint")->required();
    cmd->add_option("--size", size, "size-classifier checkpoint")->required();
    cmd->add_option("--samples", common.samples, "chains per product")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--topk", common.topk, "k list, e.g. 1,3,5,10");
    add_config_flags(cmd, common);
  };
  auto *pr = app.add_subcommand("predict", "predict reactants");
  pr->add_option("--smiles", smiles, "product SMILES (repeatable)");
  pr->add_option("--data", data, "predict every product of a corpus");
  add_models(pr);

  auto *ev = app.add_subcommand("evaluate", "top-k exact match");
  ev->add_option("--data", data, "held-out corpus")->required();
  ev->add_flag("--ablation", ablation, "also evaluate the other dual mode");
  ev->add_option("--center-ablation", center_ablation,
                 "center checkpoint trained in the other dual mode");
  ev->add_flag("--records", records, "print every prediction record");
  add_models(ev);

  auto *dg = app.add_subcommand("dualgraph", "faces and dual graph");
  dg->add_option("--smiles", smiles_one, "molecule")->required();

  auto *sm = app.add_subcommand("sample", "complete the synthons of a bond");
  sm->add_option("--smiles", smiles_one, "product")->required();
  sm->add_option("--bond", bond, "atom indices i,j of the bond to break");
  sm->add_option("--center", center, "center checkpoint (picks the bond)");
  sm->add_option("--egnn", egnn, "denoiser checkpoint")->required();
  sm->add_option("--size", size, "size-classifier checkpoint")->required();
  sm->add_option("--num-atoms", num_atoms, "atoms to generate per synthon");
  sm->add_option("--trajectory-dump", dump, "write x_t per step as JSON lines");
  add_config_flags(sm, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*gen)
      return run_gen_toy(n, rules, out, common);
    if (*tc)
      return run_train_center(data, out, common);
    if (*td)
      return run_train_diffusion(data, limit, egnn, size, common);
    if (*pr)
      return run_predict(smiles, data, center, egnn, size, common);
    if (*ev)
      return run_evaluate(data, center, egnn, size, ablation, center_ablation,
                          records, common);
    if (*dg)
      return run_dualgraph(smiles_one);
    if (*sm)
      return run_sample(smiles_one, bond, num_atoms, center, egnn, size, dump,
                        common);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
