//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/chem/conformer.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "dualretro/chem/element.h"

namespace dualretro {
namespace {
double radius(int z) {
  const ElementInfo *info = element_info(z);
  return info ? info->covalent_radius : 1.5;
}

// Ideal valence angle at `center` from its bond orders.
double valence_angle(const Molecule &mol, int center) {
  int doubles = 0;
  bool triple = false, pi = mol.atom(center).aromatic;
  for (const Neighbor &nb: mol.neighbors(center)) {
    switch (mol.bond(nb.bond).type) {
    case BondType::kTriple:
      triple = true;
      break;
    case BondType::kDouble:
      ++doubles;
      pi = true;
      break;
    case BondType::kAromatic:
      pi = true;
      break;
    default:
      break;
    }
  }
  if (triple || doubles >= 2)
    return std::numbers::pi;
  if (pi)
    return 2.0 * std::numbers::pi / 3.0;
  return std::acos(-1.0 / 3.0);
}

struct Restraint {
  int a;
  int b;
  double target;
  double weight;
  bool lower_bound_only;
};

Vec3 random_unit(Rng &rng) {
  for (;;) {
    Vec3 v = { rng.gaussian(), rng.gaussian(), rng.gaussian() };
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm > 1e-9)
      return { v[0] / norm, v[1] / norm, v[2] / norm };
  }
}
}  // namespace

double target_bond_length(const Molecule &mol, int bond) {
  const Bond &b = mol.bond(bond);
  const double sum =
      radius(mol.atom(b.src).element) + radius(mol.atom(b.dst).element);
  switch (b.type) {
  case BondType::kSingle:
    return sum;
  case BondType::kAromatic:
    return 0.93 * sum;
  case BondType::kDouble:
    return 0.87 * sum;
  case BondType::kTriple:
    return 0.78 * sum;
  }
  return sum;
}

double min_nonbonded_distance(int element_a, int element_b) {
  return std::max(2.6, 1.2 * (radius(element_a) + radius(element_b)) + 0.2);
}

std::vector<Vec3> embed_conformer(
    const Molecule &mol, Rng &rng, const ConformerOptions &options,
    const std::vector<std::optional<Vec3>> &fixed) {
  const int n = mol.num_atoms();
  if (!fixed.empty() && static_cast<int>(fixed.size()) != n)
    throw InvalidMolecule("fixed coordinate list does not match atom count");
  auto is_fixed = [&](int i) { return !fixed.empty() && fixed[i]; };

  // Restraints: bonds, 1-3 pairs through a shared neighbor, clearances.
  std::vector<Restraint> restraints;
  std::vector<std::vector<int>> relation(n, std::vector<int>(n, 0));
  std::vector<double> bond_len(mol.num_bonds());
  for (int k = 0; k < mol.num_bonds(); ++k) {
    const Bond &b = mol.bond(k);
    bond_len[k] = target_bond_length(mol, k);
    restraints.push_back({ b.src, b.dst, bond_len[k], 1.0, false });
    relation[b.src][b.dst] = relation[b.dst][b.src] = 1;
  }
  for (int c = 0; c < n; ++c) {
    const double theta = valence_angle(mol, c);
    auto nbs = mol.neighbors(c);
    for (std::size_t p = 0; p < nbs.size(); ++p) {
      for (std::size_t q = p + 1; q < nbs.size(); ++q) {
        const int a = nbs[p].atom, b = nbs[q].atom;
        if (relation[a][b] != 0)
          continue;
        const double la = bond_len[nbs[p].bond], lb = bond_len[nbs[q].bond];
        const double d =
            std::sqrt(la * la + lb * lb - 2.0 * la * lb * std::cos(theta));
        restraints.push_back({ a, b, d, 0.5, false });
        relation[a][b] = relation[b][a] = 2;
      }
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (relation[a][b] == 0)
        restraints.push_back(
            { a, b,
              min_nonbonded_distance(mol.atom(a).element,
                                     mol.atom(b).element),
              1.0, true });

  // Initial placement: breadth-first from fixed atoms and component roots,
  // each new atom one bond length from a placed neighbor.
  std::vector<Vec3> x(n, Vec3 { 0, 0, 0 });
  std::vector<bool> placed(n, false);
  std::deque<int> queue;
  for (int i = 0; i < n; ++i) {
    if (is_fixed(i)) {
      x[i] = *fixed[i];
      placed[i] = true;
      queue.push_back(i);
    }
  }
  const double box = 1.5 * std::cbrt(static_cast<double>(std::max(n, 1)));
  for (int seed = 0; seed < n; ++seed) {
    if (!placed[seed]) {
      if (queue.empty()) {
        x[seed] = { box * rng.gaussian(), box * rng.gaussian(),
                    box * rng.gaussian() };
        placed[seed] = true;
        queue.push_back(seed);
      }
    }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const Neighbor &nb: mol.neighbors(u)) {
        if (placed[nb.atom])
          continue;
        const Vec3 dir = random_unit(rng);
        for (int k = 0; k < 3; ++k)
          x[nb.atom][k] = x[u][k] + bond_len[nb.bond] * dir[k];
        placed[nb.atom] = true;
        queue.push_back(nb.atom);
      }
    }
  }

  std::vector<Vec3> grad(n);
  for (int step = 0; step < options.steps; ++step) {
    std::fill(grad.begin(), grad.end(), Vec3 { 0, 0, 0 });
    for (const Restraint &r: restraints) {
      Vec3 diff;
      double d2 = 0;
      for (int k = 0; k < 3; ++k) {
        diff[k] = x[r.a][k] - x[r.b][k];
        d2 += diff[k] * diff[k];
      }
      double d = std::sqrt(d2);
      if (d < 1e-9) {
        diff = random_unit(rng);
        d = 1.0;
      }
      const double residual = d - r.target;
      if (r.lower_bound_only && residual >= 0)
        continue;
      const double coeff = 2.0 * r.weight * residual / d;
      for (int k = 0; k < 3; ++k) {
        grad[r.a][k] += coeff * diff[k];
        grad[r.b][k] -= coeff * diff[k];
      }
    }
    for (int i = 0; i < n; ++i) {
      if (is_fixed(i))
        continue;
      Vec3 move;
      double norm2 = 0;
      for (int k = 0; k < 3; ++k) {
        move[k] = -options.step_size * grad[i][k];
        norm2 += move[k] * move[k];
      }
      const double norm = std::sqrt(norm2);
      const double scale = norm > options.max_move ? options.max_move / norm
                                                   : 1.0;
      for (int k = 0; k < 3; ++k)
        x[i][k] += scale * move[k];
    }
  }
  return x;
}

void ensure_coords(Molecule &mol, Rng &rng) {
  if (!mol.has_coords())
    mol.set_coords(embed_conformer(mol, rng));
}

}  // namespace dualretro
