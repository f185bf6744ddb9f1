//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <map>

#include <gtest/gtest.h>

#include "dualretro/chem/smiles.h"
#include "dualretro/faces/faces.h"
#include "graph_oracles.h"
#include "planar_oracle.h"

namespace dualretro {
namespace {
int outer_count(const FaceSet &fs) {
  return static_cast<int>(std::count_if(fs.faces.begin(), fs.faces.end(),
                                        [](const Face &f) { return f.outer; }));
}

std::vector<Edge> complete_graph(int n) {
  std::vector<Edge> e;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      e.emplace_back(a, b);
  return e;
}

TEST(PlanarEmbedTest, SmallCases) {
  const std::vector<Edge> path = { { 0, 1 }, { 1, 2 } };
  auto p = planar_embed(3, path);
  ASSERT_TRUE(p);
  EXPECT_EQ(enumerate_faces(*p).faces.size(), 1u);

  auto benzene = planar_embed(parse_smiles("c1ccccc1"));
  ASSERT_TRUE(benzene);
  const FaceSet fs = enumerate_faces(*benzene);
  EXPECT_EQ(fs.faces.size(), 2u);
  EXPECT_EQ(outer_count(fs), 1);

  EXPECT_FALSE(planar_embed(5, complete_graph(5)));
  EXPECT_TRUE(planar_embed(4, complete_graph(4)));
}

// Two triangles ABC and ADE sharing A; two edge types spread over both.
struct TwoTriangles {
  static constexpr int A = 0, B = 1, C = 2, D = 3, E = 4;
  static constexpr int kBlue = 0, kGreen = 1;
  std::vector<Edge> edges = { { A, B }, { A, C }, { B, C },
                              { A, D }, { A, E }, { D, E } };
  std::vector<int> types = { kBlue, kGreen, kBlue, kBlue, kGreen, kGreen };
};

TEST(DualGraphTest, TwoTriangleFixture) {
  const TwoTriangles tri;
  const auto emb = planar_embed(5, tri.edges);
  ASSERT_TRUE(emb);
  const DualGraph dual = build_dual(5, tri.types, enumerate_faces(*emb));
  ASSERT_EQ(dual.num_faces(), 3);
  EXPECT_EQ(dual.edges.size(), 6u);
  int blue = 0;
  for (const DualEdge &d: dual.edges) {
    EXPECT_EQ(d.type, tri.types[d.crossed_edge]);
    blue += d.type == TwoTriangles::kBlue;
  }
  EXPECT_EQ(blue, 3);

  // The outer face touches every node; A lies on all three faces.
  EXPECT_EQ(dual.membership[TwoTriangles::A].size(), 3u);
  EXPECT_EQ(dual.membership[TwoTriangles::B].size(), 2u);
}

TEST(DualGraphTest, FaceFeaturesAreBoundaryMeans) {
  const TwoTriangles tri;
  const DualGraph dual =
      build_dual(5, tri.types, enumerate_faces(*planar_embed(5, tri.edges)));
  Tensor x = Tensor::matrix(5, 3);
  x(0, 0) = 1.0;  // A
  x(1, 1) = 2.0;  // B
  x(2, 2) = 3.0;  // C
  x(3, 0) = 6.0;  // D
  x(4, 1) = 9.0;  // E
  const Tensor xd = dual_node_features(x, dual);
  bool found = false;
  for (int f = 0; f < dual.num_faces(); ++f) {
    if (dual.face_nodes[f] == std::vector<int> { 0, 1, 2 }) {
      found = true;
      EXPECT_NEAR(xd(f, 0), 1.0 / 3.0, 1e-15);
      EXPECT_NEAR(xd(f, 1), 2.0 / 3.0, 1e-15);
      EXPECT_NEAR(xd(f, 2), 1.0, 1e-15);
    }
  }
  EXPECT_TRUE(found);
}

TEST(DualGraphTest, Benzene) {
  const Molecule m = parse_smiles("c1ccccc1");
  const DualGraph dual = build_dual(m);
  ASSERT_EQ(dual.num_faces(), 2);
  ASSERT_EQ(dual.edges.size(), 6u);
  for (const DualEdge &d: dual.edges) {
    EXPECT_NE(d.a, d.b);
    EXPECT_EQ(d.type, static_cast<int>(BondType::kAromatic));
  }
  const Tensor xd = dual_node_features(atom_features(m), dual);
  const Tensor x = atom_features(m);
  for (int f = 0; f < 2; ++f)
    for (int c = 0; c < x.cols(); ++c)
      EXPECT_DOUBLE_EQ(xd(f, c), x(0, c));
}

TEST(DualGraphTest, EthaneAndMethane) {
  const DualGraph ethane = build_dual(parse_smiles("CC"));
  EXPECT_EQ(ethane.num_faces(), 1);
  EXPECT_TRUE(ethane.edges.empty());
  const DualGraph methane = build_dual(parse_smiles("C"));
  EXPECT_EQ(methane.num_faces(), 1);
  EXPECT_EQ(methane.membership[0], std::vector<int> { 0 });
}

TEST(DualGraphTest, TwoElementFaceIsHalfHalf) {
  const Molecule m = parse_smiles("CN");
  const DualGraph dual = build_dual(m);
  const Tensor xd = dual_node_features(atom_features(m), dual);
  EXPECT_DOUBLE_EQ(xd(0, 0), 0.5);  // carbon slot
  EXPECT_DOUBLE_EQ(xd(0, 1), 0.5);  // nitrogen slot
}

TEST(FallbackFacesTest, K5UsesSmallestRings) {
  const auto edges = complete_graph(5);
  const FaceSet fs = fallback_faces(5, edges);
  EXPECT_FALSE(fs.planar);
  ASSERT_EQ(fs.faces.size(), 7u);  // cycle rank 6 plus the catch-all face
  for (int f = 0; f < 6; ++f) {
    EXPECT_EQ(fs.faces[f].nodes.size(), 3u);
    EXPECT_FALSE(fs.faces[f].outer);
  }
  EXPECT_TRUE(fs.faces[6].outer);
  EXPECT_EQ(fs.faces[6].nodes.size(), 5u);

  const std::vector<int> types(edges.size(), 0);
  const DualGraph dual = build_dual(5, types, fs);
  EXPECT_EQ(dual.edges.size(), edges.size());  // no bridges in K5
}

TEST(FallbackFacesTest, K33RingsAreSquares) {
  std::vector<Edge> edges;
  for (int a = 0; a < 3; ++a)
    for (int b = 3; b < 6; ++b)
      edges.emplace_back(a, b);
  EXPECT_FALSE(planar_embed(6, edges));
  const auto rings = smallest_rings(6, edges);
  ASSERT_EQ(rings.size(), 4u);
  for (const Face &r: rings) {
    EXPECT_EQ(r.nodes.size(), 4u);
    EXPECT_EQ(r.edges.size(), 4u);
  }
}

TEST(FallbackFacesTest, NaphthaleneRingsAreTwoHexagons) {
  const Molecule m = parse_smiles("c1ccc2ccccc2c1");
  const auto edges = edge_list(m);
  const auto rings = smallest_rings(m.num_atoms(), edges);
  ASSERT_EQ(rings.size(), 2u);
  EXPECT_EQ(rings[0].nodes.size(), 6u);
  EXPECT_EQ(rings[1].nodes.size(), 6u);
}

// Invariants over random molecules: Euler, edge conservation, membership
// consistency, and equal relation multisets.
TEST(DualGraphPropertyTest, Invariants) {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const Molecule m = testing::random_molecule(rng, 22);
    const DualGraph dual = build_dual(m);
    const auto bridges = find_bridges(m.num_atoms(), edge_list(m));
    const int nb = static_cast<int>(std::count(bridges.begin(), bridges.end(),
                                               true));
    if (dual.face_set.planar) {
      EXPECT_EQ(dual.num_faces(), 2 - m.num_atoms() + m.num_bonds());
    }
    EXPECT_EQ(static_cast<int>(dual.edges.size()) + nb, m.num_bonds());

    int half_edges = 0;
    for (const Face &f: dual.face_set.faces)
      half_edges += static_cast<int>(f.edges.size());
    if (dual.face_set.planar) {
      EXPECT_EQ(half_edges, 2 * m.num_bonds());
    }

    for (int f = 0; f < dual.num_faces(); ++f)
      for (int v: dual.face_nodes[f])
        EXPECT_TRUE(std::binary_search(dual.membership[v].begin(),
                                       dual.membership[v].end(), f));
    for (int v = 0; v < m.num_atoms(); ++v)
      for (int f: dual.membership[v])
        EXPECT_TRUE(std::binary_search(dual.face_nodes[f].begin(),
                                       dual.face_nodes[f].end(), v));

    std::map<int, int> relation;
    for (int k = 0; k < m.num_bonds(); ++k)
      if (!bridges[k])
        ++relation[static_cast<int>(m.bond(k).type)];
    for (const DualEdge &d: dual.edges)
      --relation[d.type];
    for (const auto &[t, c]: relation)
      EXPECT_EQ(c, 0);
  }
}

TEST(PlanarOracleTest, GraphCountsMatchKnownSequence) {
  // Connected planar graphs on n unlabelled nodes, n = 1..7.
  const int expected[] = { 0, 1, 1, 2, 6, 20, 99, 646 };
  const auto levels = testing::connected_planar_graphs(7);
  for (int n = 1; n <= 7; ++n)
    EXPECT_EQ(static_cast<int>(levels[n].size()), expected[n]) << n;
}

TEST(PlanarOracleTest, CanonicalFormIgnoresLabels) {
  testing::SimpleGraph a { 4, { { 0, 1 }, { 1, 2 }, { 2, 3 } } };
  testing::SimpleGraph b { 4, { { 3, 1 }, { 1, 0 }, { 0, 2 } } };
  testing::SimpleGraph star { 4, { { 0, 1 }, { 0, 2 }, { 0, 3 } } };
  EXPECT_EQ(testing::canonical_form(a), testing::canonical_form(b));
  EXPECT_NE(testing::canonical_form(a), testing::canonical_form(star));
}

TEST(PlanarOracleTest, ExhaustiveSmallGraphsMatchRegions) {
  const auto levels = testing::connected_planar_graphs(6);
  for (int n = 1; n <= 6; ++n) {
    for (const auto &g: levels[n]) {
      const auto r = testing::check_against_oracle(g);
      EXPECT_TRUE(r.euler) << r.detail;
      EXPECT_TRUE(r.regions) << r.detail;
    }
  }
}

TEST(PlanarOracleTest, RandomGraphsMatchRegions) {
  Rng rng(12);
  for (int trial = 0; trial < 150; ++trial) {
    const auto g = testing::random_connected_planar(rng, 12);
    const auto r = testing::check_against_oracle(g);
    EXPECT_TRUE(r.euler) << r.detail;
    EXPECT_TRUE(r.regions) << r.detail;
  }
}

// Negative control: a rotation system that is not planar breaks Euler and
// the oracle comparison must notice a wrong face list.
TEST(PlanarOracleTest, OracleRejectsWrongFaces) {
  testing::SimpleGraph g { 4, complete_graph(4) };
  const auto pts = testing::straight_line_drawing(g);
  ASSERT_TRUE(pts);
  PlanarEmbedding emb = testing::rotation_from_drawing(g, *pts);
  std::swap(emb.rotation[0][0], emb.rotation[0][1]);
  const FaceSet bad = enumerate_faces(emb);
  EXPECT_NE(testing::face_boundaries(bad),
            testing::region_boundaries(g, *pts));
}
}  // namespace
}  // namespace dualretro
