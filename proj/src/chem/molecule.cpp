//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/chem/molecule.h"

#include <algorithm>
#include <string>

#include "dualretro/chem/element.h"

namespace dualretro {

double bond_order(BondType type) {
  switch (type) {
  case BondType::kSingle:
    return 1.0;
  case BondType::kDouble:
    return 2.0;
  case BondType::kTriple:
    return 3.0;
  case BondType::kAromatic:
    return 1.5;
  }
  return 1.0;
}

int Molecule::add_atom(const Atom &atom) {
  atoms_.push_back(atom);
  adj_.emplace_back();
  if (coords_)
    coords_->push_back({ 0.0, 0.0, 0.0 });
  return num_atoms() - 1;
}

int Molecule::add_bond(int i, int j, BondType type) {
  if (i < 0 || j < 0 || i >= num_atoms() || j >= num_atoms())
    throw InvalidMolecule("bond endpoint out of range: ("
                          + std::to_string(i) + ", " + std::to_string(j)
                          + ")");
  if (i == j)
    throw InvalidMolecule("self bond on atom " + std::to_string(i));
  if (find_bond(i, j) >= 0)
    throw InvalidMolecule("duplicate bond (" + std::to_string(i) + ", "
                          + std::to_string(j) + ")");

  const int k = num_bonds();
  bonds_.push_back({ i, j, type });
  adj_[i].push_back({ j, k });
  adj_[j].push_back({ i, k });
  return k;
}

int Molecule::find_bond(int i, int j) const {
  if (i < 0 || i >= num_atoms())
    return -1;
  for (const Neighbor &nb: adj_[i])
    if (nb.atom == j)
      return nb.bond;
  return -1;
}

int Molecule::valence_used(int i) const {
  int used = 0;
  for (const Neighbor &nb: adj_[i]) {
    switch (bonds_[nb.bond].type) {
    case BondType::kDouble:
      used += 2;
      break;
    case BondType::kTriple:
      used += 3;
      break;
    default:
      used += 1;
      break;
    }
  }
  if (atoms_[i].aromatic)
    ++used;
  return used;
}

int Molecule::implicit_hydrogens(int i) const {
  const Atom &a = atoms_[i];
  const int used = valence_used(i);
  const int target =
      a.aromatic ? default_valence(a.element, a.charge)
                 : default_valence_at_least(a.element, a.charge, used);
  if (target < 0)
    return 0;
  return std::max(0, target - used);
}

void Molecule::set_coords(std::vector<Vec3> coords) {
  if (static_cast<int>(coords.size()) != num_atoms())
    throw InvalidMolecule("coordinate count " + std::to_string(coords.size())
                          + " does not match " + std::to_string(num_atoms())
                          + " atoms");
  coords_ = std::move(coords);
}

Molecule Molecule::subgraph(std::span<const int> atom_ids,
                            std::span<const std::pair<int, int>> drop) const {
  std::vector<int> local(num_atoms(), -1);
  Molecule out;
  for (int id: atom_ids) {
    if (id < 0 || id >= num_atoms() || local[id] >= 0)
      throw InvalidMolecule("bad subgraph atom id " + std::to_string(id));
    local[id] = out.add_atom(atoms_[id]);
  }

  auto dropped = [&](const Bond &b) {
    return std::any_of(drop.begin(), drop.end(), [&](const auto &d) {
      return (d.first == b.src && d.second == b.dst)
             || (d.first == b.dst && d.second == b.src);
    });
  };

  for (const Bond &b: bonds_) {
    if (local[b.src] < 0 || local[b.dst] < 0 || dropped(b))
      continue;
    out.add_bond(local[b.src], local[b.dst], b.type);
  }

  if (coords_) {
    std::vector<Vec3> xyz;
    xyz.reserve(atom_ids.size());
    for (int id: atom_ids)
      xyz.push_back((*coords_)[id]);
    out.set_coords(std::move(xyz));
  }
  return out;
}

Tensor atom_features(const Molecule &mol) {
  Tensor x = Tensor::matrix(mol.num_atoms(), kAtomFeatureDim);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &a = mol.atom(i);
    x(i, element_slot(a.element)) = 1.0;
    const int charge = std::clamp(a.charge, -2, 2);
    x(i, kNumElementSlots + charge + 2) = 1.0;
    x(i, kAtomFeatureDim - 1) = a.aromatic ? 1.0 : 0.0;
  }
  return x;
}

Tensor adjacency_tensor(const Molecule &mol) {
  const int n = mol.num_atoms();
  Tensor a({ n, n, kNumBondTypes }, 0.0);
  for (const Bond &b: mol.bonds()) {
    const int t = static_cast<int>(b.type);
    a(b.src, b.dst, t) = 1.0;
    a(b.dst, b.src, t) = 1.0;
  }
  return a;
}

std::vector<int> connected_components(const Molecule &mol) {
  const int n = mol.num_atoms();
  std::vector<int> comp(n, -1);
  int next = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0)
      continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: mol.neighbors(u)) {
        if (comp[nb.atom] < 0) {
          comp[nb.atom] = next;
          stack.push_back(nb.atom);
        }
      }
    }
    ++next;
  }
  return comp;
}

std::vector<bool> find_bridges(int num_nodes,
                               std::span<const std::pair<int, int>> edges) {
  std::vector<std::vector<std::pair<int, int>>> adj(num_nodes);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    adj[edges[e].first].push_back({ edges[e].second, e });
    adj[edges[e].second].push_back({ edges[e].first, e });
  }

  std::vector<bool> bridge(edges.size(), false);
  std::vector<int> disc(num_nodes, -1), low(num_nodes, 0);
  int timer = 0;

  // Iterative DFS: (node, parent edge, next adjacency position).
  struct Frame {
    int node;
    int parent_edge;
    std::size_t pos;
  };
  std::vector<Frame> stack;
  for (int s = 0; s < num_nodes; ++s) {
    if (disc[s] >= 0)
      continue;
    disc[s] = low[s] = timer++;
    stack.push_back({ s, -1, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      if (f.pos < adj[f.node].size()) {
        const auto [v, e] = adj[f.node][f.pos++];
        if (e == f.parent_edge)
          continue;
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({ v, e, 0 });
        } else {
          low[f.node] = std::min(low[f.node], disc[v]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const int parent = stack.back().node;
          low[parent] = std::min(low[parent], low[done.node]);
          if (low[done.node] > disc[parent])
            bridge[done.parent_edge] = true;
        }
      }
    }
  }
  return bridge;
}

std::vector<std::pair<int, int>> edge_list(const Molecule &mol) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mol.num_bonds());
  for (const Bond &b: mol.bonds())
    edges.emplace_back(b.src, b.dst);
  return edges;
}

std::vector<bool> ring_bonds(const Molecule &mol) {
  const auto edges = edge_list(mol);
  std::vector<bool> bridge = find_bridges(mol.num_atoms(), edges);
  bridge.flip();
  return bridge;
}

}  // namespace dualretro
