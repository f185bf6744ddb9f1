//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_PIPELINE_PIPELINE_H_
#define DUALRETRO_PIPELINE_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualretro/assemble/assemble.h"
#include "dualretro/centernet/centernet.h"
#include "dualretro/chem/reaction.h"
#include "dualretro/diffusion/diffusion.h"
#include "dualretro/egnn/egnn.h"

namespace dualretro {

class ConfigError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class NoValidCandidate: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct InferenceConfig {
  int samples = 300;        // sampling chains per product
  int centers = 2;          // top-B reaction centers explored
  std::vector<int> topk = { 1, 3, 5, 10 };
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  CenterConfig center;
  EgnnConfig egnn;
  DenoiserTrainConfig denoiser;
  SizeConfig size;
  SizeTrainConfig size_train;
  InferenceConfig inference;
};

// Applies one `key = value` setting. Throws ConfigError for unknown keys or
// unparsable values.
void apply_config_entry(PipelineConfig &config, const std::string &key,
                        const std::string &value);

// Flat text: one `key = value` per line, `#` starts a comment. Errors
// carry the line number.
void read_config(std::istream &in, PipelineConfig &config);
void load_config(const std::string &path, PipelineConfig &config);

// Throws ConfigError when a value is out of range.
void validate_config(const PipelineConfig &config);

// Known keys with their current values, in a fixed order.
std::vector<std::pair<std::string, std::string>>
config_entries(const PipelineConfig &config);

// Copy of the molecule with a conformer seeded from its canonical string,
// so every run lays out the same product identically.
Molecule with_conformer(const Molecule &mol);

// Stage-1 example: the product graph and its center labels.
CenterExample center_example(const Reaction &rxn);

// Stage-2 training view of one synthon: the product-frame synthon, the
// atoms its reactant adds (Q) aligned to the synthon by a constrained
// conformer, and the state z_0 = [S; Q] in the synthon-centred frame.
struct SynthonSample {
  SynthonTemplate tmpl;
  std::vector<int> attachments;  // synthon-local indices on the center
  Molecule reactant;             // ground-truth reactant, maps cleared
  std::vector<int> q_elements;
  DiffusionState z0;
};

// One entry per synthon of the labelled center. Throws InvalidReaction when
// the reaction has no center or a reactant spans several synthons.
std::vector<SynthonSample> synthon_samples(const Reaction &rxn);

SizeExample size_example(const SynthonSample &sample);

// Canonical reactant-set string of a reaction (maps ignored).
std::string reactant_set_key(const Reaction &rxn);

struct Models {
  ParameterSet center;
  CenterConfig center_config;
  ParameterSet egnn;
  EgnnConfig egnn_config;
  ParameterSet size;
  SizeConfig size_config;
};

struct RankedCandidate {
  std::string reactants;  // canonical reactant set
  int count = 0;
};

struct PredictionRecord {
  std::string product;
  std::vector<ScoredBond> centers;  // explored centers with chain budgets
  std::vector<int> chains;
  std::vector<int> sizes;           // predicted |Q| per synthon, in order
  int samples = 0;
  int valid = 0;
  std::vector<RankedCandidate> candidates;  // by count, then first seen
  std::optional<std::string> truth;
  int hit_rank = 0;  // 1-based rank of the truth, 0 when absent
};

// Full two-stage inference for one product. Throws NoValidCandidate when
// no chain produced a valid reactant set.
PredictionRecord predict(const Molecule &product, const Models &models,
                         const InferenceConfig &config, std::uint64_t seed);

// One sampling chain for one synthon: `num_free` atoms are generated around
// it, each element is the argmax over the feature slots, and the atoms are
// bonded to the synthon by distance. Element slots with no element make the
// candidate invalid.
Candidate sample_synthon(const SynthonTemplate &tmpl,
                         std::span<const int> attachments, int num_free,
                         const Models &models, const NoiseSchedule &schedule,
                         Rng &rng, const StepCallback &on_step = {});

// Attachment atoms of each synthon, synthon-local indices.
std::vector<int> attachment_atoms(const Synthon &synthon);

struct EvalRow {
  std::string label;
  std::vector<int> k;
  std::vector<double> accuracy;  // top-k exact match, per k
  double center_top1 = 0.0;      // stage-1 accuracy on the same records
  int records = 0;
  int no_candidate = 0;
};

// Top-k exact match of the ground-truth reactant set over the corpus.
EvalRow evaluate(const std::vector<Reaction> &corpus, const Models &models,
                 const InferenceConfig &config, std::uint64_t seed,
                 const std::string &label,
                 const std::function<void(const PredictionRecord &)>
                     &on_record = {});

// Stage-2 training on a corpus: denoiser on every synthon with atoms to
// generate, size classifier on every synthon.
struct DiffusionTrainData {
  std::vector<DiffusionState> states;
  std::vector<SizeExample> sizes;
};
DiffusionTrainData diffusion_train_data(const std::vector<Reaction> &corpus);

// Line-delimited JSON of a prediction; key order and number formatting are
// fixed.
std::string record_json(const PredictionRecord &record);
std::string eval_json(const EvalRow &row);

}  // namespace dualretro

#endif  // DUALRETRO_PIPELINE_PIPELINE_H_
