//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dualretro/chem/conformer.h"
#include "dualretro/chem/dataset.h"
#include "dualretro/chem/element.h"
#include "dualretro/chem/smiles.h"
#include "graph_oracles.h"

namespace dualretro {
namespace {
int count_type(const Molecule &m, BondType t) {
  int c = 0;
  for (const Bond &b: m.bonds())
    c += b.type == t;
  return c;
}

// Independent cycle rank: bonds - atoms + components.
int cycle_rank(const Molecule &m) {
  const auto comp = connected_components(m);
  const int components = m.empty() ? 0 : *std::max_element(comp.begin(),
                                                            comp.end()) + 1;
  return m.num_bonds() - m.num_atoms() + components;
}

TEST(SmilesParseTest, Ethane) {
  Molecule m = parse_smiles("CC");
  EXPECT_EQ(m.num_atoms(), 2);
  EXPECT_EQ(m.num_bonds(), 1);
  EXPECT_EQ(m.bond(0).type, BondType::kSingle);
  EXPECT_EQ(m.total_hydrogens(0), 3);
}

TEST(SmilesParseTest, Benzene) {
  Molecule m = parse_smiles("c1ccccc1");
  EXPECT_EQ(m.num_atoms(), 6);
  EXPECT_EQ(count_type(m, BondType::kAromatic), 6);
  EXPECT_EQ(cycle_rank(m), 1);
  for (int i = 0; i < 6; ++i) {
    EXPECT_TRUE(m.atom(i).aromatic);
    EXPECT_EQ(m.total_hydrogens(i), 1);
  }
}

TEST(SmilesParseTest, EthylBenzoate) {
  // Hand trace: C C O C (=O) c1 c c c c c1 gives 11 heavy atoms, 10 chain
  // bonds plus one ring closure.
  Molecule m = parse_smiles("CCOC(=O)c1ccccc1");
  EXPECT_EQ(m.num_atoms(), 11);
  EXPECT_EQ(m.num_bonds(), 11);
  EXPECT_EQ(cycle_rank(m), 1);
  EXPECT_EQ(count_type(m, BondType::kDouble), 1);
  EXPECT_EQ(count_type(m, BondType::kAromatic), 6);
  EXPECT_EQ(m.bond(m.find_bond(3, 5)).type, BondType::kSingle);
}

TEST(SmilesParseTest, BracketAtoms) {
  Molecule m = parse_smiles("[NH4+].[O-]C(=O)C.c1cc[nH]c1.[CH3:7]Cl");
  EXPECT_EQ(m.atom(0).charge, 1);
  EXPECT_EQ(m.total_hydrogens(0), 4);
  EXPECT_EQ(m.atom(0).explicit_h, -1);  // folded back into the implicit model
  EXPECT_EQ(m.atom(1).charge, -1);
  EXPECT_EQ(m.total_hydrogens(1), 0);
  const int pyrrole_n = 8;
  EXPECT_EQ(m.atom(pyrrole_n).element, 7);
  EXPECT_EQ(m.total_hydrogens(pyrrole_n), 1);
  EXPECT_EQ(m.atom(pyrrole_n).explicit_h, 1);
  EXPECT_EQ(m.atom(10).map, 7);
  EXPECT_EQ(m.atom(11).element, 17);
}

TEST(SmilesParseTest, BiphenylLinkIsSingle) {
  Molecule m = parse_smiles("c1ccccc1c1ccccc1");
  EXPECT_EQ(count_type(m, BondType::kAromatic), 12);
  EXPECT_EQ(count_type(m, BondType::kSingle), 1);
}

TEST(SmilesParseTest, PercentRingsAndExplicitClosureBond) {
  Molecule a = parse_smiles("C%12CCCC%12");
  EXPECT_EQ(cycle_rank(a), 1);
  Molecule b = parse_smiles("C=1CCCCC1");
  EXPECT_EQ(count_type(b, BondType::kDouble), 1);
}

TEST(SmilesParseTest, Errors) {
  EXPECT_THROW(parse_smiles("C[13C]"), UnsupportedToken);
  EXPECT_THROW(parse_smiles("C[C@H](O)N"), UnsupportedToken);
  EXPECT_THROW(parse_smiles("C/C=C/C"), UnsupportedToken);
  EXPECT_THROW(parse_smiles("CXC"), UnsupportedToken);
  EXPECT_THROW(parse_smiles("B"), UnsupportedToken);
  EXPECT_THROW(parse_smiles("c1ccccc"), UnclosedRing);
  EXPECT_THROW(parse_smiles("CC(C"), UnbalancedParenthesis);
  EXPECT_THROW(parse_smiles("CC)C"), UnbalancedParenthesis);
  EXPECT_THROW(parse_smiles("[CH3"), UnsupportedToken);
  EXPECT_THROW(parse_smiles("C=1CC#1"), SmilesError);
  EXPECT_NO_THROW(parse_smiles(""));
}

TEST(SmilesWriteTest, RoundTripsSmallCases) {
  EXPECT_EQ(write_smiles(parse_smiles("CC")), "CC");
  EXPECT_EQ(write_smiles(parse_smiles("OCC")), write_smiles(parse_smiles("CCO")));
  EXPECT_EQ(write_smiles(parse_smiles("C(=O)(O)C")),
            write_smiles(parse_smiles("CC(O)=O")));
}

TEST(SmilesWriteTest, BenzeneNumberingIsIrrelevant) {
  const std::string ref = write_smiles(parse_smiles("c1ccccc1"));
  EXPECT_EQ(ref, "c1ccccc1");
  for (const char *s: { "c9ccccc9", "c%10ccccc%10", "c1cc(ccc1)", "c1:c:c:c:c:c1" })
    EXPECT_EQ(write_smiles(parse_smiles(s)), ref) << s;
}

TEST(SmilesWriteTest, AtomMapsAndOrder) {
  Molecule m = parse_smiles("[CH3:2][OH:1]");
  std::vector<int> order;
  const std::string s = write_smiles(m, {}, &order);
  ASSERT_EQ(order.size(), 2u);
  Molecule back = parse_smiles(s);
  for (int k = 0; k < 2; ++k)
    EXPECT_EQ(back.atom(k).map, m.atom(order[k]).map);
  EXPECT_EQ(canonical_smiles(m), "CO");
}

TEST(SmilesWriteTest, SetCanonicalizationSortsComponents) {
  const std::vector<Molecule> a = { parse_smiles("OCC"), parse_smiles("Cl") };
  const std::vector<Molecule> b = { parse_smiles("Cl"), parse_smiles("CCO") };
  EXPECT_EQ(canonical_smiles_set(a), canonical_smiles_set(b));
  EXPECT_EQ(canonical_smiles_set({ parse_smiles("CCO.Cl") }),
            canonical_smiles_set(a));
}

// Property: for random subset molecules, write -> parse is isomorphic to the
// source, and every atom renumbering writes the same string.
TEST(SmilesPropertyTest, RandomRoundTripsAndCanonicity) {
  Rng rng(20260101);
  for (int trial = 0; trial < 1000; ++trial) {
    const Molecule m = testing::random_molecule(rng, 24);
    const std::string s = write_smiles(m);
    Molecule back;
    ASSERT_NO_THROW(back = parse_smiles(s)) << s;
    ASSERT_TRUE(testing::isomorphic(m, back, true)) << s;
    EXPECT_EQ(write_smiles(back), s);

    std::vector<int> perm(m.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    EXPECT_EQ(write_smiles(testing::permute(m, perm)), s) << s;
  }
}

TEST(CenterLabelTest, IdenticalReactantGivesZeroLabels) {
  Reaction rxn;
  rxn.product = parse_smiles("[CH3:1][CH2:2][OH:3]");
  rxn.reactants = { parse_smiles("[OH:3][CH2:2][CH3:1]") };
  const Tensor y = derive_center_labels(rxn);
  for (std::size_t k = 0; k < y.size(); ++k)
    EXPECT_EQ(y[k], 0.0);
}

TEST(CenterLabelTest, EthanolFromEthaneAndWater) {
  Reaction rxn;
  rxn.product = parse_smiles("[CH3:1][CH2:2][OH:3]");
  rxn.reactants = { parse_smiles("[CH3:1][CH3:2]"), parse_smiles("[OH2:3]") };
  const Tensor y = derive_center_labels(rxn);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_EQ(y(i, j), (i == 1 && j == 2) || (i == 2 && j == 1) ? 1.0 : 0.0);
}

TEST(CenterLabelTest, MissingMapsAreRejected) {
  Reaction rxn;
  rxn.product = parse_smiles("[CH3:1]C");
  rxn.reactants = { parse_smiles("[CH3:1]C") };
  EXPECT_THROW(derive_center_labels(rxn), MissingAtomMap);
  rxn.product = parse_smiles("[CH3:1][CH3:9]");
  EXPECT_THROW(derive_center_labels(rxn), MissingAtomMap);
}

// Split a random mapped molecule at random bonds; the labels must be
// symmetric, hollow, and count exactly the bonds a set-difference oracle
// finds missing.
TEST(CenterLabelTest, MatchesBondSetDifferenceOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Molecule product = testing::random_molecule(rng, 16);
    if (product.num_bonds() == 0)
      continue;
    for (int i = 0; i < product.num_atoms(); ++i)
      product.atom(i).map = i + 1;

    std::vector<std::pair<int, int>> drop;
    const int cuts = rng.uniform_int(1, std::min(2, product.num_bonds()));
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < cuts)
      chosen.insert(rng.uniform_int(0, product.num_bonds() - 1));
    for (int k: chosen)
      drop.emplace_back(product.bond(k).src, product.bond(k).dst);

    std::vector<int> all(product.num_atoms());
    std::iota(all.begin(), all.end(), 0);
    const Molecule broken = product.subgraph(all, drop);
    const auto comp = connected_components(broken);
    Reaction rxn;
    rxn.product = product;
    const int ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
    for (int c = 0; c < ncomp; ++c) {
      std::vector<int> ids;
      for (int i = 0; i < broken.num_atoms(); ++i)
        if (comp[i] == c)
          ids.push_back(i);
      rxn.reactants.push_back(broken.subgraph(ids));
    }

    std::set<std::pair<int, int>> product_pairs, reactant_pairs;
    for (const Bond &b: product.bonds())
      product_pairs.insert(std::minmax(product.atom(b.src).map,
                                       product.atom(b.dst).map));
    for (const Molecule &r: rxn.reactants)
      for (const Bond &b: r.bonds())
        reactant_pairs.insert(std::minmax(r.atom(b.src).map,
                                          r.atom(b.dst).map));
    int missing = 0;
    for (const auto &p: product_pairs)
      missing += !reactant_pairs.count(p);

    const Tensor y = derive_center_labels(rxn);
    double total = 0;
    for (int i = 0; i < y.rows(); ++i) {
      EXPECT_EQ(y(i, i), 0.0);
      for (int j = 0; j < y.cols(); ++j) {
        EXPECT_EQ(y(i, j), y(j, i));
        total += y(i, j);
      }
    }
    EXPECT_EQ(total / 2, missing);
    EXPECT_EQ(missing, cuts);
  }
}

TEST(SynthonTest, BridgeSplitsInTwo) {
  const Molecule m = parse_smiles("CCO");
  const auto s = extract_synthons(m, { 1, 2 });
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].atom_ids, (std::vector<int> { 0, 1 }));
  EXPECT_EQ(s[1].atom_ids, (std::vector<int> { 2 }));
  EXPECT_EQ(s[0].fragment().num_bonds(), 1);
}

TEST(SynthonTest, RingBondStaysWhole) {
  const Molecule m = parse_smiles("c1ccccc1");
  const auto s = extract_synthons(m, { 0, 5 });
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].atom_ids.size(), 6u);
  EXPECT_EQ(s[0].fragment().num_bonds(), 5);
  EXPECT_THROW(extract_synthons(m, { 0, 3 }), NotABond);
}

// Protecting-group shape: a carbamate product splits at the N-C bond into
// the amine fragment and the protecting-group fragment.
TEST(SynthonTest, ProtectionShapeSplitsIntoTwoFragments) {
  const Molecule m = parse_smiles("CC(C)(C)OC(=O)NCc1ccccc1");
  const int n_atom = 7, carbonyl = 5;
  ASSERT_EQ(m.atom(n_atom).element, 7);
  const auto s = extract_synthons(m, { carbonyl, n_atom });
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].atom_ids.size() + s[1].atom_ids.size(),
            static_cast<std::size_t>(m.num_atoms()));
}

TEST(SynthonPropertyTest, PartitionOrEqual) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const Molecule m = testing::random_molecule(rng, 20);
    if (m.num_bonds() == 0)
      continue;
    const Bond &b = m.bond(rng.uniform_int(0, m.num_bonds() - 1));
    const auto s = extract_synthons(m, { b.src, b.dst });
    const bool ring = ring_bonds(m)[m.find_bond(b.src, b.dst)];
    ASSERT_EQ(s.size(), ring ? 1u : 2u);
    std::vector<int> all;
    for (const Synthon &x: s)
      all.insert(all.end(), x.atom_ids.begin(), x.atom_ids.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expected(m.num_atoms());
    std::iota(expected.begin(), expected.end(), 0);
    EXPECT_EQ(all, expected);
  }
}

TEST(FeaturizeTest, ShapesAndSymmetry) {
  const Molecule m = parse_smiles("CC(=O)[O-].c1ccncc1");
  const Featurized f = featurize(m);
  const int n = m.num_atoms();
  ASSERT_EQ(f.features.rows(), n);
  ASSERT_EQ(f.features.cols(), kAtomFeatureDim);
  for (int i = 0; i < n; ++i) {
    double row = 0;
    for (int c = 0; c < kAtomFeatureDim; ++c)
      row += f.features(i, c);
    EXPECT_EQ(row, 2.0 + (m.atom(i).aromatic ? 1.0 : 0.0));
    for (int j = 0; j < n; ++j) {
      int set = 0;
      for (int t = 0; t < kNumBondTypes; ++t) {
        EXPECT_EQ(f.adjacency(i, j, t), f.adjacency(j, i, t));
        set += f.adjacency(i, j, t) > 0;
      }
      EXPECT_EQ(set, m.find_bond(i, j) >= 0 ? 1 : 0);
    }
  }
  EXPECT_EQ(f.features(3, kNumElementSlots + 1), 1.0);  // charge -1 slot
}

TEST(DatasetTest, EmptyInputGivesEmptyList) {
  std::stringstream in("");
  EXPECT_TRUE(read_reactions(in).empty());
  std::stringstream blank("\n  \n");
  EXPECT_TRUE(read_reactions(blank).empty());
}

TEST(DatasetTest, MultiProductIsRejected) {
  std::stringstream a(
      R"({"product": ["[CH4:1]", "[OH2:2]"], "reactants": ["[CH4:1]"]})");
  EXPECT_THROW(read_reactions(a), MultiProductRecord);
  std::stringstream b(
      R"({"product": "[CH4:1].[OH2:2]", "reactants": ["[CH4:1]", "[OH2:2]"]})");
  EXPECT_THROW(read_reactions(b), MultiProductRecord);
}

TEST(DatasetTest, MalformedRecordReportsLine) {
  std::stringstream in(
      "{\"product\": \"[CH4:1]\", \"reactants\": [\"[CH4:1]\"]}\n"
      "\n"
      "{\"product\": \"C(\", \"reactants\": [\"C\"]}\n");
  try {
    read_reactions(in);
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord &e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(DatasetTest, FormatReadRoundTrip) {
  Reaction rxn;
  rxn.product = parse_smiles("[CH3:1][CH2:2][OH:3]");
  rxn.reactants = { parse_smiles("[CH3:1][CH3:2]"), parse_smiles("[OH2:3]") };
  rxn.class_id = 4;
  Rng rng(1);
  ensure_coords(rxn.product, rng);

  std::stringstream io;
  write_reactions(io, { rxn, rxn });
  const auto back = read_reactions(io);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(testing::isomorphic(back[0].product, rxn.product, true));
  EXPECT_EQ(back[0].class_id, 4);
  ASSERT_TRUE(back[0].product.has_coords());
  EXPECT_EQ(canonical_smiles_set(back[0].reactants),
            canonical_smiles_set(rxn.reactants));
  const Tensor y0 = derive_center_labels(rxn);
  const Tensor y1 = derive_center_labels(back[0]);
  double s0 = 0, s1 = 0;
  for (std::size_t k = 0; k < y0.size(); ++k) {
    s0 += y0[k];
    s1 += y1[k];
  }
  EXPECT_EQ(s0, s1);
}

double dist(const Vec3 &a, const Vec3 &b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])
                   + (a[2] - b[2]) * (a[2] - b[2]));
}

TEST(ConformerTest, BondLengthsNearTargets) {
  Rng rng(3);
  for (const char *s: { "CCOC(=O)c1ccccc1", "CC(C)(C)OC(=O)NCc1ccccc1",
                        "C1CCCCC1", "CC#N" }) {
    const Molecule m = parse_smiles(s);
    const auto x = embed_conformer(m, rng);
    for (int k = 0; k < m.num_bonds(); ++k) {
      const Bond &b = m.bond(k);
      EXPECT_NEAR(dist(x[b.src], x[b.dst]), target_bond_length(m, k), 0.1)
          << s << " bond " << k;
    }
    // Non-bonded atoms stay outside the bond-perception cutoff.
    for (int i = 0; i < m.num_atoms(); ++i)
      for (int j = i + 1; j < m.num_atoms(); ++j)
        if (m.find_bond(i, j) < 0) {
          const double cutoff =
              1.2 * (element_info(m.atom(i).element)->covalent_radius
                     + element_info(m.atom(j).element)->covalent_radius);
          EXPECT_GT(dist(x[i], x[j]), cutoff) << s;
        }
  }
}

TEST(ConformerTest, FixedAtomsKeepExactCoordinates) {
  const Molecule m = parse_smiles("CC(=O)Cl");
  std::vector<std::optional<Vec3>> fixed(m.num_atoms());
  fixed[0] = Vec3 { 0.1, 0.2, 0.3 };
  fixed[1] = Vec3 { 1.6, 0.2, 0.3 };
  Rng rng(9);
  const auto x = embed_conformer(m, rng, {}, fixed);
  EXPECT_EQ(x[0], *fixed[0]);
  EXPECT_EQ(x[1], *fixed[1]);
  EXPECT_NEAR(dist(x[1], x[3]), target_bond_length(m, m.find_bond(1, 3)), 0.1);
}

TEST(ConformerTest, SeedReproduces) {
  const Molecule m = parse_smiles("c1ccccc1O");
  Rng a(4), b(4);
  EXPECT_EQ(embed_conformer(m, a), embed_conformer(m, b));
}
}  // namespace
}  // namespace dualretro
