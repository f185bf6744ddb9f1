//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/pipeline/toy.h"

#include <algorithm>

#include "dualretro/chem/smiles.h"

namespace dualretro {
namespace {
struct Rule {
  const char *name;
  std::vector<const char *> electrophiles;  // leaving atom 0, reactive atom 1
  std::vector<const char *> nucleophiles;   // reactive atom 0
};

const std::vector<const char *> kAlcohols = {
  "OC", "OCC", "OC(C)C", "OCc1ccccc1", "Oc1ccccc1", "OCCC", "OC1CCCC1",
  "OCC(F)(F)F",
};

const std::vector<const char *> kAmines = {
  "NC", "NCC", "N(C)C", "NC1CC1", "Nc1ccccc1", "N1CCOCC1", "N1CCCCC1",
  "NCCO",
};

const std::vector<const char *> kAcylChlorides = {
  "ClC(=O)C", "ClC(=O)CC", "ClC(=O)c1ccccc1", "ClC(=O)C(C)C",
  "ClC(=O)c1ccc(C)cc1", "ClC(=O)C1CC1", "ClC(=O)COC",
};

// Benzylic and allylic bromides with amines that carry no such group, so
// the new bond is never equivalent to an existing one.
const std::vector<Rule> &rules() {
  static const std::vector<Rule> table = {
    { "esterification", kAcylChlorides, kAlcohols },
    { "amide", kAcylChlorides, kAmines },
    { "n-alkylation",
      { "BrCc1ccccc1", "BrCc1ccc(C)cc1", "BrCc1ccc(Cl)cc1", "BrCc1ccccn1",
        "BrCC=C" },
      { "N1CCOCC1", "N1CCCCC1", "N1CCCC1", "N(C)C", "NC1CCCCC1",
        "Nc1ccccc1" } },
    { "williamson",
      { "BrCC", "BrCCC", "BrCC(C)C", "BrCc1ccccc1", "BrCC=C" },
      { "Oc1ccccc1", "Oc1ccc(C)cc1", "Oc1ccc(Cl)cc1", "Oc1ccc(F)cc1",
        "Oc1ccc(C#N)cc1", "Oc1ccccc1C" } },
    { "sulfonamide",
      { "ClS(=O)(=O)C", "ClS(=O)(=O)c1ccccc1", "ClS(=O)(=O)c1ccc(C)cc1",
        "ClS(=O)(=O)CC" },
      kAmines },
  };
  return table;
}

Reaction join(const char *electrophile, const char *nucleophile,
              int class_id) {
  Molecule e = parse_smiles(electrophile);
  Molecule nu = parse_smiles(nucleophile);
  Molecule p;
  // Product atoms: electrophile atoms 1.., then nucleophile atoms.
  std::vector<int> e_to_p(e.num_atoms(), -1), n_to_p(nu.num_atoms(), -1);
  for (int i = 1; i < e.num_atoms(); ++i)
    e_to_p[i] = p.add_atom(e.atom(i));
  for (int i = 0; i < nu.num_atoms(); ++i)
    n_to_p[i] = p.add_atom(nu.atom(i));
  for (const Bond &b: e.bonds())
    if (b.src != 0 && b.dst != 0)
      p.add_bond(e_to_p[b.src], e_to_p[b.dst], b.type);
  for (const Bond &b: nu.bonds())
    p.add_bond(n_to_p[b.src], n_to_p[b.dst], b.type);
  p.add_bond(e_to_p[1], n_to_p[0], BondType::kSingle);

  for (int i = 0; i < p.num_atoms(); ++i)
    p.atom(i).map = i + 1;
  for (int i = 0; i < e.num_atoms(); ++i)
    e.atom(i).map = e_to_p[i] < 0 ? 0 : e_to_p[i] + 1;
  for (int i = 0; i < nu.num_atoms(); ++i)
    nu.atom(i).map = n_to_p[i] + 1;

  Reaction rxn;
  rxn.product = std::move(p);
  rxn.reactants = { std::move(e), std::move(nu) };
  rxn.class_id = class_id;
  return rxn;
}
}  // namespace

std::vector<std::string> toy_rule_names() {
  std::vector<std::string> names;
  for (const Rule &r: rules())
    names.emplace_back(r.name);
  return names;
}

void check_toy_reaction(const Reaction &rxn) {
  validate_reaction(rxn);
  if (center_bonds(derive_center_labels(rxn)).size() != 1)
    throw InvalidReaction("expected exactly one reaction-center bond");
}

std::vector<Reaction> gen_toy_corpus(const std::vector<std::string> &names,
                                     int n, Rng &rng) {
  if (names.empty())
    throw std::invalid_argument("no toy rules selected");
  if (n < 0)
    throw std::invalid_argument("negative corpus size");
  struct Pick {
    int rule;
    const char *electrophile;
    const char *nucleophile;
  };
  std::vector<Pick> pool;
  for (const std::string &name: names) {
    const auto &table = rules();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Rule &r) { return name == r.name; });
    if (it == table.end())
      throw UnknownRule("unknown toy rule '" + name + "'");
    const int id = static_cast<int>(it - table.begin());
    for (const char *e: it->electrophiles)
      for (const char *nu: it->nucleophiles)
        pool.push_back({ id, e, nu });
  }

  std::vector<Reaction> out;
  std::vector<int> order;
  while (static_cast<int>(out.size()) < n) {
    if (order.empty()) {
      order.resize(pool.size());
      for (std::size_t k = 0; k < pool.size(); ++k)
        order[k] = static_cast<int>(k);
      rng.shuffle(order);
      std::reverse(order.begin(), order.end());
    }
    const Pick &pick = pool[order.back()];
    order.pop_back();
    Reaction rxn = join(pick.electrophile, pick.nucleophile, pick.rule + 1);
    check_toy_reaction(rxn);
    out.push_back(std::move(rxn));
  }
  return out;
}

}  // namespace dualretro
