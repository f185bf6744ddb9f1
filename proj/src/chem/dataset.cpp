//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/chem/dataset.h"

#include <fstream>

#include <json.hpp>

#include "dualretro/chem/smiles.h"

namespace dualretro {
namespace {
using json = nlohmann::json;

Molecule molecule_field(const json &value, int line, const char *what) {
  if (!value.is_string())
    throw MalformedRecord(line, std::string(what) + " must be a SMILES string");
  try {
    return parse_smiles(value.get<std::string>());
  } catch (const SmilesError &e) {
    throw MalformedRecord(line, std::string(what) + ": " + e.what());
  }
}

void apply_maps(Molecule &mol, const json &maps, int line) {
  if (!maps.is_array() || static_cast<int>(maps.size()) != mol.num_atoms())
    throw MalformedRecord(line, "map list length does not match atom count");
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (!maps[i].is_number_integer() || maps[i].get<int>() < 0)
      throw MalformedRecord(line, "atom maps must be non-negative integers");
    mol.atom(i).map = maps[i].get<int>();
  }
}

void apply_coords(Molecule &mol, const json &xyz, int line) {
  if (!xyz.is_array() || static_cast<int>(xyz.size()) != mol.num_atoms())
    throw MalformedRecord(line, "coordinate count does not match atom count");
  std::vector<Vec3> coords;
  for (const json &p: xyz) {
    if (!p.is_array() || p.size() != 3)
      throw MalformedRecord(line, "coordinates must be [x, y, z] triples");
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
      if (!p[k].is_number())
        throw MalformedRecord(line, "coordinates must be numbers");
      v[k] = p[k].get<double>();
    }
    coords.push_back(v);
  }
  mol.set_coords(std::move(coords));
}

Reaction parse_record(const std::string &text, int line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw MalformedRecord(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw MalformedRecord(line, "record must be an object");
  if (!j.contains("product"))
    throw MalformedRecord(line, "missing \"product\"");
  if (!j.contains("reactants") || !j["reactants"].is_array()
      || j["reactants"].empty())
    throw MalformedRecord(line, "\"reactants\" must be a non-empty list");

  const json &prod = j["product"];
  if (prod.is_array()) {
    if (prod.size() != 1)
      throw MultiProductRecord(line, "record has "
                                         + std::to_string(prod.size())
                                         + " products");
  }
  Reaction rxn;
  rxn.product = molecule_field(prod.is_array() ? prod[0] : prod, line,
                               "product");
  if (rxn.product.empty())
    throw MalformedRecord(line, "empty product");
  {
    const auto comp = connected_components(rxn.product);
    for (int c: comp)
      if (c != 0)
        throw MultiProductRecord(line, "product SMILES holds several "
                                       "molecules");
  }
  for (const json &r: j["reactants"])
    rxn.reactants.push_back(molecule_field(r, line, "reactant"));

  if (j.contains("maps")) {
    const json &maps = j["maps"];
    if (!maps.is_object() || !maps.contains("product")
        || !maps.contains("reactants") || !maps["reactants"].is_array()
        || maps["reactants"].size() != rxn.reactants.size())
      throw MalformedRecord(line, "\"maps\" needs product and per-reactant "
                                  "lists");
    apply_maps(rxn.product, maps["product"], line);
    for (std::size_t r = 0; r < rxn.reactants.size(); ++r)
      apply_maps(rxn.reactants[r], maps["reactants"][r], line);
  }

  if (j.contains("class") && !j["class"].is_null()) {
    if (!j["class"].is_number_integer())
      throw MalformedRecord(line, "\"class\" must be an integer");
    rxn.class_id = j["class"].get<int>();
  }

  if (j.contains("coords")) {
    const json &c = j["coords"];
    if (!c.is_object())
      throw MalformedRecord(line, "\"coords\" must be an object");
    if (c.contains("product"))
      apply_coords(rxn.product, c["product"], line);
    if (c.contains("reactants")) {
      if (!c["reactants"].is_array()
          || c["reactants"].size() != rxn.reactants.size())
        throw MalformedRecord(line, "one coordinate list per reactant");
      for (std::size_t r = 0; r < rxn.reactants.size(); ++r)
        apply_coords(rxn.reactants[r], c["reactants"][r], line);
    }
  }

  try {
    validate_reaction(rxn);
  } catch (const std::invalid_argument &e) {
    throw MalformedRecord(line, e.what());
  }
  return rxn;
}

json coords_json(const Molecule &mol, const std::vector<int> &order) {
  json out = json::array();
  for (int i: order) {
    const Vec3 &p = mol.coords()[i];
    out.push_back({ p[0], p[1], p[2] });
  }
  return out;
}
}  // namespace

std::vector<Reaction> read_reactions(std::istream &in) {
  std::vector<Reaction> out;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    out.push_back(parse_record(text, line));
  }
  return out;
}

std::vector<Reaction> load_reactions(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return read_reactions(in);
}

std::string format_reaction(const Reaction &rxn) {
  json j;
  const SmilesWriteOptions plain { .atom_maps = false };
  std::vector<int> order;

  j["product"] = write_smiles(rxn.product, plain, &order);
  json maps;
  json product_maps = json::array();
  for (int i: order)
    product_maps.push_back(rxn.product.atom(i).map);
  maps["product"] = product_maps;

  json coords;
  bool any_coords = false;
  if (rxn.product.has_coords()) {
    coords["product"] = coords_json(rxn.product, order);
    any_coords = true;
  }

  json reactants = json::array();
  json reactant_maps = json::array();
  json reactant_coords = json::array();
  bool all_reactant_coords = !rxn.reactants.empty();
  for (const Molecule &r: rxn.reactants) {
    reactants.push_back(write_smiles(r, plain, &order));
    json m = json::array();
    for (int i: order)
      m.push_back(r.atom(i).map);
    reactant_maps.push_back(m);
    if (r.has_coords())
      reactant_coords.push_back(coords_json(r, order));
    else
      all_reactant_coords = false;
  }
  j["reactants"] = reactants;
  maps["reactants"] = reactant_maps;
  j["maps"] = maps;
  if (rxn.class_id)
    j["class"] = *rxn.class_id;
  if (all_reactant_coords) {
    coords["reactants"] = reactant_coords;
    any_coords = true;
  }
  if (any_coords)
    j["coords"] = coords;
  return j.dump();
}

void write_reactions(std::ostream &out, const std::vector<Reaction> &rxns) {
  for (const Reaction &rxn: rxns)
    out << format_reaction(rxn) << '\n';
}

void save_reactions(const std::string &path,
                    const std::vector<Reaction> &rxns) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  write_reactions(out, rxns);
}

Featurized featurize(const Molecule &mol) {
  return { adjacency_tensor(mol), atom_features(mol) };
}

}  // namespace dualretro
