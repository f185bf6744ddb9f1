//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_CHEM_MOLECULE_H_
#define DUALRETRO_CHEM_MOLECULE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dualretro/numerics/tensor.h"

namespace dualretro {

using Vec3 = std::array<double, 3>;

enum class BondType : std::uint8_t {
  kSingle = 0,
  kDouble = 1,
  kTriple = 2,
  kAromatic = 3,
};

inline constexpr int kNumBondTypes = 4;

// Aromatic bonds count 1.5.
double bond_order(BondType type);

struct Atom {
  int element = 6;  // atomic number
  int charge = 0;
  bool aromatic = false;
  // Hydrogen count fixed by a bracket atom; -1 derives it from the default
  // valence of the element.
  int explicit_h = -1;
  int map = 0;  // reaction atom-map number, 0 when unmapped
};

struct Bond {
  int src;
  int dst;
  BondType type;

  int other(int atom) const { return atom == src ? dst : src; }
};

struct Neighbor {
  int atom;
  int bond;
};

class InvalidMolecule: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Heavy-atom molecular graph. Hydrogens are never nodes; they are carried
// as counts. Atom and bond indices are dense and stable.
class Molecule {
public:
  int add_atom(const Atom &atom);

  // Throws InvalidMolecule on out-of-range endpoints, self loops or a second
  // bond between the same pair.
  int add_bond(int i, int j, BondType type);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &atom(int i) { return atoms_[i]; }
  const std::vector<Atom> &atoms() const { return atoms_; }

  const Bond &bond(int k) const { return bonds_[k]; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  void set_bond_type(int k, BondType type) { bonds_[k].type = type; }

  std::span<const Neighbor> neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  // -1 when i and j are not bonded.
  int find_bond(int i, int j) const;

  // Bond-order sum with aromatic bonds counted as one, plus one for an
  // aromatic atom. Drives implicit hydrogen assignment.
  int valence_used(int i) const;

  int implicit_hydrogens(int i) const;

  int total_hydrogens(int i) const {
    return atoms_[i].explicit_h >= 0 ? atoms_[i].explicit_h
                                     : implicit_hydrogens(i);
  }

  bool has_coords() const { return coords_.has_value(); }
  const std::vector<Vec3> &coords() const { return coords_.value(); }
  void set_coords(std::vector<Vec3> coords);
  void clear_coords() { coords_.reset(); }

  // Sub-molecule over `atom_ids` (kept in the given order), with every bond
  // among them except those listed in `drop`.
  Molecule subgraph(std::span<const int> atom_ids,
                    std::span<const std::pair<int, int>> drop = {}) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adj_;
  std::optional<std::vector<Vec3>> coords_;
};

// Feature matrix X (n x kAtomFeatureDim): one-hot element slot, one-hot
// formal charge in [-2, 2], aromatic flag.
inline constexpr int kChargeSlots = 5;
inline constexpr int kAtomFeatureDim = 10 + kChargeSlots + 1;

Tensor atom_features(const Molecule &mol);

// Adjacency tensor A (n x n x kNumBondTypes), symmetric in the first two
// axes, one type set per bonded pair.
Tensor adjacency_tensor(const Molecule &mol);

// Connected component id per atom, numbered by smallest member.
std::vector<int> connected_components(const Molecule &mol);

// Bridges of an undirected graph given as an edge list; result is indexed by
// edge.
std::vector<bool> find_bridges(int num_nodes,
                               std::span<const std::pair<int, int>> edges);

std::vector<bool> ring_bonds(const Molecule &mol);

std::vector<std::pair<int, int>> edge_list(const Molecule &mol);

}  // namespace dualretro

#endif  // DUALRETRO_CHEM_MOLECULE_H_
