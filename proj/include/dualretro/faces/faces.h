//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_FACES_FACES_H_
#define DUALRETRO_FACES_FACES_H_

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dualretro/chem/molecule.h"
#include "dualretro/numerics/tensor.h"

namespace dualretro {

using Edge = std::pair<int, int>;

// Rotation system: for every node, the cyclic order of its incident edges
// (as indices into `edges`).
struct PlanarEmbedding {
  int num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> rotation;
};

// Planarity test plus embedding. nullopt when the graph is not planar.
std::optional<PlanarEmbedding> planar_embed(int num_nodes,
                                            std::span<const Edge> edges);
std::optional<PlanarEmbedding> planar_embed(const Molecule &mol);

struct Face {
  // Boundary walk. For planar faces nodes[k] -> nodes[k + 1] crosses
  // edges[k] (wrapping around); bridges and cut vertices repeat. A lone
  // node has a one-node walk with no edges.
  std::vector<int> nodes;
  std::vector<int> edges;
  bool outer = false;
};

struct FaceSet {
  std::vector<Face> faces;
  // The faces on the two sides of every edge; equal entries mark an edge
  // that separates nothing (a bridge).
  std::vector<std::array<int, 2>> edge_faces;
  bool planar = true;
};

// Faces of a rotation system by the next-half-edge rule. Every connected
// component gets its own outer face: the longest boundary walk, ties going
// to the lexicographically smallest sorted boundary.
FaceSet enumerate_faces(const PlanarEmbedding &embedding);

// Cycles of a smallest set of smallest rings, in selection order, each as a
// closed node walk with its edges.
std::vector<Face> smallest_rings(int num_nodes, std::span<const Edge> edges);

// Replacement face structure for non-planar graphs: the smallest set of
// smallest rings plus one catch-all face holding every node (marked outer,
// last). An edge in two or more rings separates the first two of them; an
// edge in exactly one ring separates it from the catch-all face; an edge on
// no ring separates nothing.
FaceSet fallback_faces(int num_nodes, std::span<const Edge> edges);
FaceSet fallback_faces(const Molecule &mol);

struct DualEdge {
  int a;
  int b;
  int type;
  int crossed_edge;
};

struct DualGraph {
  FaceSet face_set;
  std::vector<DualEdge> edges;
  // F_i: sorted faces whose boundary contains node i.
  std::vector<std::vector<int>> membership;
  // S_f: sorted distinct boundary nodes of face f.
  std::vector<std::vector<int>> face_nodes;

  int num_faces() const {
    return static_cast<int>(face_set.faces.size());
  }
};

// One dual edge per separating edge, typed as the crossed edge; parallel
// dual edges are kept.
DualGraph build_dual(int num_nodes, std::span<const int> edge_types,
                     FaceSet faces);

// Planar embedding when one exists, otherwise the ring fallback. Edge types
// are bond types.
DualGraph build_dual(const Molecule &mol);

// X_d: row f is the mean of X rows over the distinct boundary nodes of f.
Tensor dual_node_features(const Tensor &x, const DualGraph &dual);

}  // namespace dualretro

#endif  // DUALRETRO_FACES_FACES_H_
