//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/assemble/assemble.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dualretro/chem/element.h"

namespace dualretro {
namespace {
double distance(const Vec3 &a, const Vec3 &b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

int order_of(BondType t) {
  switch (t) {
  case BondType::kDouble:
    return 2;
  case BondType::kTriple:
    return 3;
  default:
    return 1;
  }
}

BondType type_of(int order) {
  return order == 3 ? BondType::kTriple
                    : (order == 2 ? BondType::kDouble : BondType::kSingle);
}

std::string symbol(int z) {
  const ElementInfo *e = element_info(z);
  return e ? std::string(e->symbol) : "?";
}
}  // namespace

std::vector<InferredBond> infer_bonds(std::span<const int> elements,
                                      std::span<const Vec3> coords,
                                      std::span<const char> skip,
                                      const BondPerception &rules) {
  if (elements.size() != coords.size())
    throw std::invalid_argument("infer_bonds: elements and coordinates differ");
  const int n = static_cast<int>(elements.size());
  std::vector<InferredBond> out;
  for (int i = 0; i < n; ++i) {
    const ElementInfo *ei = element_info(elements[i]);
    if (!ei)
      continue;
    for (int j = i + 1; j < n; ++j) {
      if (!skip.empty() && skip[i] && skip[j])
        continue;
      const ElementInfo *ej = element_info(elements[j]);
      if (!ej)
        continue;
      const double sum = ei->covalent_radius + ej->covalent_radius;
      const double d = distance(coords[i], coords[j]);
      if (d > rules.tolerance * sum)
        continue;
      const double ratio = d / sum;
      const BondType t = ratio < rules.triple_below   ? BondType::kTriple
                         : ratio < rules.double_below ? BondType::kDouble
                                                      : BondType::kSingle;
      out.push_back({ i, j, t });
    }
  }
  return out;
}

std::vector<std::string> valence_check(const Molecule &mol) {
  std::vector<std::string> problems;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &a = mol.atom(i);
    const int limit = max_valence(a.element, a.charge);
    if (limit < 0)
      continue;
    const int used = mol.valence_used(i) + mol.total_hydrogens(i);
    if (used > limit)
      problems.push_back("atom " + std::to_string(i) + " (" + symbol(a.element)
                         + ") has valence " + std::to_string(used) + " > "
                         + std::to_string(limit));
  }
  return problems;
}

SynthonTemplate make_template(const Synthon &synthon) {
  const Molecule &parent = synthon.parent;
  if (!parent.has_coords())
    throw std::invalid_argument("make_template: product has no coordinates");
  SynthonTemplate t;
  t.fragment = synthon.fragment();
  const int k = parent.find_bond(synthon.broken_bond.first,
                                 synthon.broken_bond.second);
  const int lost = k < 0 ? 0 : order_of(parent.bond(k).type);
  std::vector<Vec3> xyz;
  for (int id: synthon.atom_ids) {
    xyz.push_back(parent.coords()[id]);
    t.product_hydrogens.push_back(parent.total_hydrogens(id));
    const bool end = id == synthon.broken_bond.first
                     || id == synthon.broken_bond.second;
    t.lost_order.push_back(end ? lost : 0);
  }
  t.fragment.set_coords(std::move(xyz));
  return t;
}

Candidate complete_reactant(const SynthonTemplate &synthon,
                            std::span<const int> sampled_elements,
                            std::span<const Vec3> sampled_coords,
                            const BondPerception &rules) {
  const Molecule &frag = synthon.fragment;
  if (!frag.has_coords())
    throw std::invalid_argument("complete_reactant: synthon has no coordinates");
  if (sampled_elements.size() != sampled_coords.size())
    throw std::invalid_argument("complete_reactant: sample size mismatch");
  const int ns = frag.num_atoms();
  const int nq = static_cast<int>(sampled_elements.size());
  const int n = ns + nq;

  Candidate c;
  Molecule &mol = c.molecule;
  for (int i = 0; i < ns; ++i)
    mol.add_atom(frag.atom(i));
  for (const Bond &b: frag.bonds())
    mol.add_bond(b.src, b.dst, b.type);
  std::vector<int> elements(n);
  std::vector<Vec3> coords(n);
  std::vector<char> is_synthon(n, 0);
  for (int i = 0; i < ns; ++i) {
    elements[i] = frag.atom(i).element;
    coords[i] = frag.coords()[i];
    is_synthon[i] = 1;
  }
  for (int k = 0; k < nq; ++k) {
    Atom a;
    a.element = sampled_elements[k];
    mol.add_atom(a);
    elements[ns + k] = a.element;
    coords[ns + k] = sampled_coords[k];
    if (!element_info(a.element) || max_valence(a.element, 0) < 0)
      c.problems.push_back("generated atom " + std::to_string(ns + k)
                           + " has no supported element");
  }

  // Remaining bond capacity: hydrogens a synthon atom can give up, or free
  // valence of a generated atom.
  std::vector<int> capacity(n, 0);
  for (int i = 0; i < ns; ++i)
    capacity[i] = synthon.product_hydrogens[i] + synthon.lost_order[i];
  for (int k = 0; k < nq; ++k)
    capacity[ns + k] = std::max(0, max_valence(elements[ns + k], 0));

  std::vector<InferredBond> bonds =
      infer_bonds(elements, coords, is_synthon, rules);
  auto rel = [&](const InferredBond &b) {
    return distance(coords[b.i], coords[b.j])
           / (element_info(elements[b.i])->covalent_radius
              + element_info(elements[b.j])->covalent_radius);
  };
  std::stable_sort(bonds.begin(), bonds.end(),
                   [&](const InferredBond &a, const InferredBond &b) {
                     return rel(a) < rel(b);
                   });
  std::vector<int> gained(n, 0);
  for (const InferredBond &b: bonds) {
    int order = order_of(b.type);
    while (order > 1 && (capacity[b.i] < order || capacity[b.j] < order))
      --order;
    capacity[b.i] -= order;
    capacity[b.j] -= order;
    gained[b.i] += order;
    gained[b.j] += order;
    mol.add_bond(b.i, b.j, type_of(order));
  }

  for (int i = 0; i < ns; ++i) {
    const int h =
        synthon.product_hydrogens[i] + synthon.lost_order[i] - gained[i];
    if (h < 0)
      c.problems.push_back("atom " + std::to_string(i) + " (" +
                           symbol(elements[i]) + ") gained "
                           + std::to_string(gained[i]) + " bond orders");
    mol.atom(i).explicit_h = std::max(0, h);
  }
  for (const std::string &p: valence_check(mol))
    c.problems.push_back(p);

  const std::vector<int> comp = connected_components(mol);
  c.connected = true;
  for (int k = 0; k < nq; ++k) {
    bool linked = false;
    for (int i = 0; i < ns && !linked; ++i)
      linked = comp[i] == comp[ns + k];
    c.connected = c.connected && linked;
  }
  mol.set_coords(coords);
  c.valid = c.problems.empty();
  return c;
}

}  // namespace dualretro
