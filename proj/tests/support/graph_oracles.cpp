//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "graph_oracles.h"

#include <algorithm>
#include <deque>
#include <tuple>

#include "dualretro/chem/element.h"

namespace dualretro::testing {
namespace {
using Label = std::tuple<int, int, bool, int, int, int>;

Label label(const Molecule &m, int i, bool maps) {
  const Atom &a = m.atom(i);
  return { a.element, a.charge, a.aromatic, m.total_hydrogens(i),
           maps ? a.map : 0, m.degree(i) };
}

int bond_code(const Molecule &m, int i, int j) {
  const int k = m.find_bond(i, j);
  return k < 0 ? -1 : static_cast<int>(m.bond(k).type);
}

bool extend(const Molecule &a, const Molecule &b, bool maps,
            const std::vector<int> &order, std::size_t depth,
            std::vector<int> &fwd, std::vector<bool> &used) {
  if (depth == order.size())
    return true;
  const int u = order[depth];
  const Label lu = label(a, u, maps);
  for (int v = 0; v < b.num_atoms(); ++v) {
    if (used[v] || label(b, v, maps) != lu)
      continue;
    bool ok = true;
    for (std::size_t k = 0; k < depth && ok; ++k) {
      const int w = order[k];
      ok = bond_code(a, u, w) == bond_code(b, v, fwd[w]);
    }
    if (!ok)
      continue;
    fwd[u] = v;
    used[v] = true;
    if (extend(a, b, maps, order, depth + 1, fwd, used))
      return true;
    used[v] = false;
  }
  fwd[u] = -1;
  return false;
}

int spare_valence(const Molecule &m, int i) {
  const Atom &a = m.atom(i);
  const int limit = max_valence(a.element, a.charge);
  return limit - m.valence_used(i);
}

int pick_element(Rng &rng) {
  static constexpr int kPool[] = { 6, 6, 6, 6, 6, 6, 7, 7, 8, 8,
                                   9, 15, 16, 17, 35, 53 };
  return kPool[rng.uniform_int(0, std::size(kPool) - 1)];
}

void add_aromatic_ring(Molecule &m, Rng &rng, int anchor) {
  const bool pyridine = rng.uniform() < 0.3;
  int first = -1, prev = -1;
  for (int k = 0; k < 6; ++k) {
    Atom atom;
    atom.element = pyridine && k == 3 ? 7 : 6;
    atom.aromatic = true;
    const int idx = m.add_atom(atom);
    if (prev >= 0)
      m.add_bond(prev, idx, BondType::kAromatic);
    else
      first = idx;
    prev = idx;
  }
  m.add_bond(prev, first, BondType::kAromatic);
  if (anchor >= 0)
    m.add_bond(anchor, first, BondType::kSingle);
}
}  // namespace

bool isomorphic(const Molecule &a, const Molecule &b, bool compare_maps) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;
  const int n = a.num_atoms();

  // Breadth-first order keeps each new atom adjacent to mapped ones, which
  // prunes early.
  std::vector<int> order;
  std::vector<bool> seen(n, false);
  for (int s = 0; s < n; ++s) {
    if (seen[s])
      continue;
    std::deque<int> queue = { s };
    seen[s] = true;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (const Neighbor &nb: a.neighbors(u))
        if (!seen[nb.atom]) {
          seen[nb.atom] = true;
          queue.push_back(nb.atom);
        }
    }
  }

  std::vector<int> fwd(n, -1);
  std::vector<bool> used(n, false);
  return extend(a, b, compare_maps, order, 0, fwd, used);
}

Molecule random_molecule(Rng &rng, int max_heavy_atoms) {
  Molecule m;
  const int target = rng.uniform_int(1, std::max(1, max_heavy_atoms));
  if (target >= 6 && rng.uniform() < 0.3) {
    add_aromatic_ring(m, rng, -1);
  } else {
    m.add_atom({ .element = pick_element(rng) });
  }

  while (m.num_atoms() < target) {
    std::vector<int> open;
    for (int i = 0; i < m.num_atoms(); ++i)
      if (spare_valence(m, i) > 0)
        open.push_back(i);
    if (open.empty())
      break;
    const int anchor = open[rng.uniform_int(0, open.size() - 1)];

    if (m.num_atoms() + 6 <= target && rng.uniform() < 0.15) {
      add_aromatic_ring(m, rng, anchor);
      continue;
    }

    Atom atom { .element = pick_element(rng) };
    const double u = rng.uniform();
    if (atom.element == 7 && u < 0.08)
      atom.charge = 1;
    else if (atom.element == 8 && u < 0.08)
      atom.charge = -1;
    const int idx = m.add_atom(atom);
    BondType type = BondType::kSingle;
    const int room = std::min(spare_valence(m, anchor), spare_valence(m, idx));
    const double r = rng.uniform();
    if (room >= 3 && r < 0.08)
      type = BondType::kTriple;
    else if (room >= 2 && r < 0.25)
      type = BondType::kDouble;
    m.add_bond(anchor, idx, type);
  }

  // A few extra ring closures among non-aromatic atoms.
  const int closures = rng.uniform_int(0, 2);
  for (int c = 0; c < closures; ++c) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      const int i = rng.uniform_int(0, m.num_atoms() - 1);
      const int j = rng.uniform_int(0, m.num_atoms() - 1);
      if (i == j || m.atom(i).aromatic || m.atom(j).aromatic
          || m.find_bond(i, j) >= 0 || spare_valence(m, i) < 1
          || spare_valence(m, j) < 1)
        continue;
      m.add_bond(i, j, BondType::kSingle);
      break;
    }
  }
  return m;
}

Molecule permute(const Molecule &mol, const std::vector<int> &perm) {
  const int n = mol.num_atoms();
  std::vector<int> inverse(n);
  for (int i = 0; i < n; ++i)
    inverse[perm[i]] = i;
  Molecule out;
  for (int k = 0; k < n; ++k)
    out.add_atom(mol.atom(inverse[k]));
  std::vector<int> bonds(mol.num_bonds());
  for (int k = 0; k < mol.num_bonds(); ++k)
    bonds[k] = k;
  // Reverse the bond order too so adjacency lists differ.
  std::reverse(bonds.begin(), bonds.end());
  for (int k: bonds) {
    const Bond &b = mol.bond(k);
    out.add_bond(perm[b.dst], perm[b.src], b.type);
  }
  if (mol.has_coords()) {
    std::vector<Vec3> xyz(n);
    for (int i = 0; i < n; ++i)
      xyz[perm[i]] = mol.coords()[i];
    out.set_coords(std::move(xyz));
  }
  return out;
}

}  // namespace dualretro::testing
