//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "dualretro/chem/dataset.h"
#include "dualretro/chem/smiles.h"
#include "dualretro/pipeline/pipeline.h"
#include "dualretro/pipeline/toy.h"

namespace dualretro {
namespace {
Reaction ester() {
  Reaction r;
  r.product = parse_smiles("[CH3:1][C:2](=[O:3])[O:4][CH2:5][CH3:6]");
  r.reactants = { parse_smiles("[CH3:1][C:2](=[O:3])[Cl:7]"),
                  parse_smiles("[OH:4][CH2:5][CH3:6]") };
  return r;
}

double dist(const Tensor &x, int i, int j) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k)
    s += (x(i, k) - x(j, k)) * (x(i, k) - x(j, k));
  return std::sqrt(s);
}

TEST(ToyCorpusTest, DeterministicAndWellFormed) {
  Rng a(7), b(7);
  const auto ca = gen_toy_corpus(toy_rule_names(), 60, a);
  const auto cb = gen_toy_corpus(toy_rule_names(), 60, b);
  ASSERT_EQ(ca.size(), 60u);
  std::ostringstream sa, sb;
  write_reactions(sa, ca);
  write_reactions(sb, cb);
  EXPECT_EQ(sa.str(), sb.str());
  for (const Reaction &r: ca)
    EXPECT_NO_THROW(check_toy_reaction(r));
}

TEST(ToyCorpusTest, RuleSelection) {
  Rng rng(1);
  EXPECT_THROW(gen_toy_corpus({}, 5, rng), std::invalid_argument);
  EXPECT_THROW(gen_toy_corpus({ "nope" }, 5, rng), UnknownRule);
  EXPECT_THROW(gen_toy_corpus({ "amide" }, -1, rng), std::invalid_argument);
  EXPECT_TRUE(gen_toy_corpus({ "amide" }, 0, rng).empty());
  for (const Reaction &r: gen_toy_corpus({ "williamson" }, 20, rng))
    EXPECT_EQ(r.class_id, 4);
}

TEST(ConfigTest, ReadRoundTripAndErrors) {
  PipelineConfig c;
  std::istringstream in("# comment\nseed = 42\ncenter.dual = off\n"
                        "inference.topk = 1,2\n\ndiffusion.lr=0.5 # x\n");
  read_config(in, c);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_FALSE(c.center.use_dual);
  EXPECT_EQ(c.inference.topk, (std::vector<int> { 1, 2 }));
  EXPECT_EQ(c.denoiser.adam.lr, 0.5);

  PipelineConfig d;
  std::ostringstream text;
  for (const auto &[k, v]: config_entries(c))
    text << k << " = " << v << "\n";
  std::istringstream back(text.str());
  read_config(back, d);
  EXPECT_EQ(config_entries(c), config_entries(d));

  std::istringstream bad("seed = 1\nbogus = 2\n");
  try {
    read_config(bad, d);
    FAIL();
  } catch (const ConfigError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(apply_config_entry(d, "center.epochs", "ten"), ConfigError);
  d.inference.samples = 0;
  EXPECT_THROW(validate_config(d), ConfigError);
}

TEST(SynthonSampleTest, FixedRowsKeepProductGeometry) {
  const Reaction r = ester();
  const auto samples = synthon_samples(r);
  ASSERT_EQ(samples.size(), 2u);
  std::vector<int> sizes;
  for (const SynthonSample &s: samples) {
    const DiffusionState &z = s.z0;
    const int ns = s.tmpl.fragment.num_atoms();
    const int n = ns + static_cast<int>(s.q_elements.size());
    ASSERT_EQ(z.x.rows(), n);
    sizes.push_back(static_cast<int>(s.q_elements.size()));
    // Synthon-centred frame.
    for (int k = 0; k < 3; ++k) {
      double m = 0.0;
      for (int i = 0; i < ns; ++i)
        m += z.x(i, k);
      EXPECT_NEAR(m / ns, 0.0, 1e-12);
    }
    const auto &xyz = s.tmpl.fragment.coords();
    for (int i = 0; i < ns; ++i) {
      EXPECT_EQ(z.fixed[i], 1);
      for (int j = i + 1; j < ns; ++j) {
        const double ref = std::sqrt(
            (xyz[i][0] - xyz[j][0]) * (xyz[i][0] - xyz[j][0])
            + (xyz[i][1] - xyz[j][1]) * (xyz[i][1] - xyz[j][1])
            + (xyz[i][2] - xyz[j][2]) * (xyz[i][2] - xyz[j][2]));
        EXPECT_NEAR(dist(z.x, i, j), ref, 1e-9);
      }
    }
    for (int i = ns; i < n; ++i)
      EXPECT_EQ(z.fixed[i], 0);
  }
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<int> { 0, 1 }));
  // Same input, same conformers.
  const auto again = synthon_samples(r);
  for (std::size_t s = 0; s < samples.size(); ++s)
    EXPECT_EQ(samples[s].z0.x.values(), again[s].z0.x.values());
}

TEST(SynthonSampleTest, TrainDataSkipsEmptyQ) {
  const DiffusionTrainData data = diffusion_train_data({ ester() });
  EXPECT_EQ(data.sizes.size(), 2u);
  EXPECT_EQ(data.states.size(), 1u);
}

TEST(ReactantSetKeyTest, IgnoresMapsAndOrder) {
  Reaction a = ester();
  Reaction b;
  b.reactants = { parse_smiles("CCO"), parse_smiles("ClC(C)=O") };
  EXPECT_EQ(reactant_set_key(a), reactant_set_key(b));
}

TEST(RecordJsonTest, FixedKeyOrder) {
  PredictionRecord rec;
  rec.product = "CC";
  rec.centers = { ScoredBond { 0, 1, 0.75 } };
  rec.chains = { 3 };
  rec.sizes = { 1, 0 };
  rec.samples = 3;
  rec.valid = 2;
  rec.candidates = { { "C.C", 2 } };
  rec.truth = "C.C";
  rec.hit_rank = 1;
  const auto j = nlohmann::ordered_json::parse(record_json(rec));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it)
    keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string> { "product", "centers", "sizes",
                                              "samples", "valid", "candidates",
                                              "truth", "hit_rank" }));
  EXPECT_EQ(j["centers"][0]["chains"], 3);
  EXPECT_EQ(j["candidates"][0]["count"], 2);
  rec.truth.reset();
  EXPECT_FALSE(nlohmann::json::parse(record_json(rec)).contains("hit_rank"));
}
}  // namespace
}  // namespace dualretro
