//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Geometric cross-check for face enumeration. Graphs are drawn with straight
// lines on an integer grid; regions of the drawing are found by sampling
// points next to every edge and inside every vertex wedge and joining samples
// that see each other. The edges bordering each region, read off the side
// samples, must equal the face walks of the combinatorial enumeration.

#ifndef DUALRETRO_TESTS_PLANAR_ORACLE_H_
#define DUALRETRO_TESTS_PLANAR_ORACLE_H_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dualretro/faces/faces.h"
#include "dualretro/numerics/rng.h"

namespace dualretro::testing {

struct SimpleGraph {
  int n = 0;
  std::vector<Edge> edges;
};

// All connected planar graphs on 1..max_n nodes up to isomorphism, indexed
// by node count (entry 0 is empty).
std::vector<std::vector<SimpleGraph>> connected_planar_graphs(int max_n);

// Canonical labelled form: equal for isomorphic graphs only.
std::string canonical_form(const SimpleGraph &g);

// Random connected planar graph with 1..max_n nodes: a random spanning tree
// plus random extra edges that keep the graph planar.
SimpleGraph random_connected_planar(Rng &rng, int max_n);

using Point = std::array<double, 2>;

// Straight-line planar drawing; nullopt if the graph is not planar.
std::optional<std::vector<Point>> straight_line_drawing(const SimpleGraph &g);

// Rotation system read off a drawing: incident edges by angle.
PlanarEmbedding rotation_from_drawing(const SimpleGraph &g,
                                      const std::vector<Point> &points);

// Sorted edge multiset of every region of the drawing, the whole list
// sorted.
std::vector<std::vector<int>> region_boundaries(
    const SimpleGraph &g, const std::vector<Point> &points);

// Same shape as region_boundaries for a face set.
std::vector<std::vector<int>> face_boundaries(const FaceSet &faces);

struct OracleOutcome {
  bool euler = false;   // planar_embed + enumerate_faces satisfies Euler
  bool regions = false; // faces on the drawing's rotation match regions
  std::string detail;
};

OracleOutcome check_against_oracle(const SimpleGraph &g);

}  // namespace dualretro::testing

#endif  // DUALRETRO_TESTS_PLANAR_ORACLE_H_
