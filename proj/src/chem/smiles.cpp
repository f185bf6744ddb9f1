//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/chem/smiles.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include "dualretro/chem/element.h"

namespace dualretro {
namespace {
struct RingOpen {
  int atom;
  std::optional<BondType> type;
  std::size_t position;
};

class Parser {
public:
  explicit Parser(std::string_view text): text_(text) {}

  Molecule run() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      switch (c) {
      case '(':
        if (prev_ < 0)
          throw UnbalancedParenthesis("branch without a preceding atom",
                                      pos_);
        branches_.push_back({ prev_, pos_ });
        ++pos_;
        break;
      case ')':
        if (branches_.empty())
          throw UnbalancedParenthesis("unmatched ')'", pos_);
        if (pending_)
          throw UnsupportedToken("bond symbol before ')'", pos_);
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
        break;
      case '-':
      case '=':
      case '#':
      case ':':
        if (pending_ || prev_ < 0)
          throw UnsupportedToken(std::string("misplaced bond '") + c + "'",
                                 pos_);
        pending_ = c == '-'   ? BondType::kSingle
                   : c == '=' ? BondType::kDouble
                   : c == '#' ? BondType::kTriple
                              : BondType::kAromatic;
        pending_pos_ = pos_++;
        break;
      case '.':
        if (pending_)
          throw UnsupportedToken("bond symbol before '.'", pos_);
        prev_ = -1;
        ++pos_;
        break;
      case '%':
        ring_closure(parse_percent());
        break;
      case '[':
        add_atom(parse_bracket());
        break;
      default:
        if (std::isdigit(static_cast<unsigned char>(c))) {
          const std::size_t at = pos_++;
          ring_closure({ c - '0', at });
        } else {
          add_atom(parse_organic());
        }
        break;
      }
    }

    if (!branches_.empty())
      throw UnbalancedParenthesis("unclosed '('", branches_.back().second);
    if (!rings_.empty())
      throw UnclosedRing("ring " + std::to_string(rings_.begin()->first)
                             + " never closed",
                         rings_.begin()->second.position);
    if (pending_)
      throw UnsupportedToken("dangling bond symbol", pending_pos_);

    // Unmarked aromatic-aromatic bonds off any ring are single.
    const std::vector<bool> ring = ring_bonds(mol_);
    for (int k: implicit_aromatic_)
      if (!ring[k])
        mol_.set_bond_type(k, BondType::kSingle);

    for (int i = 0; i < mol_.num_atoms(); ++i) {
      Atom &a = mol_.atom(i);
      if (a.explicit_h >= 0 && a.explicit_h == mol_.implicit_hydrogens(i))
        a.explicit_h = -1;
    }
    return std::move(mol_);
  }

private:
  std::pair<int, std::size_t> parse_percent() {
    const std::size_t at = pos_;
    if (pos_ + 2 >= text_.size()
        || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))
        || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])))
      throw UnsupportedToken("'%' must be followed by two digits", at);
    const int number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
    pos_ += 3;
    return { number, at };
  }

  void ring_closure(std::pair<int, std::size_t> ring) {
    const auto [number, at] = ring;
    if (prev_ < 0)
      throw UnsupportedToken("ring closure without a preceding atom", at);
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_[number] = { prev_, pending_, at };
      pending_.reset();
      return;
    }

    const RingOpen open = it->second;
    rings_.erase(it);
    if (open.type && pending_ && *open.type != *pending_)
      throw SmilesError("conflicting bond symbols on ring closure "
                            + std::to_string(number),
                        at);
    if (open.atom == prev_ || mol_.find_bond(open.atom, prev_) >= 0)
      throw SmilesError("ring closure " + std::to_string(number)
                            + " duplicates a bond",
                        at);
    std::optional<BondType> type = open.type ? open.type : pending_;
    pending_.reset();
    connect(open.atom, prev_, type);
  }

  void connect(int a, int b, std::optional<BondType> type) {
    if (type) {
      mol_.add_bond(a, b, *type);
      return;
    }
    if (mol_.atom(a).aromatic && mol_.atom(b).aromatic) {
      implicit_aromatic_.push_back(mol_.add_bond(a, b, BondType::kAromatic));
    } else {
      mol_.add_bond(a, b, BondType::kSingle);
    }
  }

  void add_atom(const Atom &atom) {
    const int idx = mol_.add_atom(atom);
    if (prev_ >= 0) {
      connect(prev_, idx, pending_);
    } else if (pending_) {
      throw UnsupportedToken("bond symbol without a preceding atom",
                             pending_pos_);
    }
    pending_.reset();
    prev_ = idx;
  }

  Atom parse_organic() {
    const std::size_t at = pos_;
    const char c = text_[pos_];
    Atom atom;
    if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
      atom.element = 17;
      pos_ += 2;
      return atom;
    }
    if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
      atom.element = 35;
      pos_ += 2;
      return atom;
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      const int z = atomic_number(std::string_view(&text_[pos_], 1));
      if (z > 0 && is_organic_subset(z)) {
        atom.element = z;
        ++pos_;
        return atom;
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      const char upper =
          static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      const int z = atomic_number(std::string_view(&upper, 1));
      if (z > 0 && has_aromatic_form(z)) {
        atom.element = z;
        atom.aromatic = true;
        ++pos_;
        return atom;
      }
    }
    throw UnsupportedToken(std::string("unsupported token '") + c + "'", at);
  }

  int parse_int() {
    int value = 0;
    while (pos_ < text_.size()
           && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      value = value * 10 + (text_[pos_++] - '0');
    return value;
  }

  bool digit_here() const {
    return pos_ < text_.size()
           && std::isdigit(static_cast<unsigned char>(text_[pos_]));
  }

  Atom parse_bracket() {
    const std::size_t open = pos_++;
    auto peek = [&]() { return pos_ < text_.size() ? text_[pos_] : '\0'; };
    if (digit_here())
      throw UnsupportedToken("isotopes are not supported", pos_);

    Atom atom;
    const char c = peek();
    if (std::isupper(static_cast<unsigned char>(c))) {
      int z = 0;
      if (pos_ + 1 < text_.size()
          && std::islower(static_cast<unsigned char>(text_[pos_ + 1])))
        z = atomic_number(text_.substr(pos_, 2));
      if (z > 0) {
        pos_ += 2;
      } else {
        z = atomic_number(text_.substr(pos_, 1));
        if (z == 0)
          throw UnsupportedToken("unknown element", pos_);
        ++pos_;
      }
      atom.element = z;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      const char upper =
          static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      const int z = atomic_number(std::string_view(&upper, 1));
      if (z == 0 || !has_aromatic_form(z))
        throw UnsupportedToken("unsupported aromatic symbol", pos_);
      atom.element = z;
      atom.aromatic = true;
      ++pos_;
    } else {
      throw UnsupportedToken("bracket atom without element", pos_);
    }

    if (peek() == '@')
      throw UnsupportedToken("stereo marks are not supported", pos_);

    atom.explicit_h = 0;
    if (peek() == 'H') {
      ++pos_;
      atom.explicit_h = digit_here() ? parse_int() : 1;
    }

    if (peek() == '+' || peek() == '-') {
      const int sign = peek() == '+' ? 1 : -1;
      const char symbol = peek();
      ++pos_;
      if (digit_here()) {
        atom.charge = sign * parse_int();
      } else {
        int count = 1;
        while (peek() == symbol) {
          ++count;
          ++pos_;
        }
        atom.charge = sign * count;
      }
    }

    if (peek() == ':') {
      ++pos_;
      if (!digit_here())
        throw UnsupportedToken("atom map without digits", pos_);
      atom.map = parse_int();
    }

    if (peek() != ']')
      throw UnsupportedToken("unterminated or malformed bracket atom",
                             pos_ < text_.size() ? pos_ : open);
    ++pos_;
    return atom;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Molecule mol_;
  int prev_ = -1;
  std::optional<BondType> pending_;
  std::size_t pending_pos_ = 0;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, RingOpen> rings_;
  std::vector<int> implicit_aromatic_;
};

// Canonical writer.

struct WriterGraph {
  const Molecule &mol;
  bool maps;
  std::vector<int> hydrogens;
  std::vector<bool> ring;
};

using Ranking = std::vector<int>;

// Dense ranks of `keys` (equal keys share a rank).
template <typename Key>
Ranking dense_ranks(const std::vector<Key> &keys) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });
  Ranking rank(n, 0);
  int r = 0;
  for (int k = 0; k < n; ++k) {
    if (k > 0 && keys[idx[k - 1]] < keys[idx[k]])
      ++r;
    rank[idx[k]] = r;
  }
  return rank;
}

int num_classes(const Ranking &rank) {
  return rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end()) + 1;
}

Ranking initial_ranks(const WriterGraph &g) {
  using Key = std::tuple<int, int, int, int, int, int>;
  std::vector<Key> keys;
  for (int i = 0; i < g.mol.num_atoms(); ++i) {
    const Atom &a = g.mol.atom(i);
    keys.emplace_back(a.element, a.charge, g.mol.degree(i), a.aromatic ? 1 : 0,
                      g.hydrogens[i], g.maps ? a.map : 0);
  }
  return dense_ranks(keys);
}

// Iterated neighborhood refinement until the partition stops splitting.
Ranking refine(const WriterGraph &g, Ranking rank) {
  const int n = g.mol.num_atoms();
  int classes = num_classes(rank);
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  std::vector<Key> keys(n);
  while (classes < n) {
    for (int i = 0; i < n; ++i) {
      keys[i].first = rank[i];
      auto &nbs = keys[i].second;
      nbs.clear();
      for (const Neighbor &nb: g.mol.neighbors(i))
        nbs.emplace_back(rank[nb.atom],
                         static_cast<int>(g.mol.bond(nb.bond).type));
      std::sort(nbs.begin(), nbs.end());
    }
    Ranking next = dense_ranks(keys);
    const int next_classes = num_classes(next);
    rank = std::move(next);
    if (next_classes == classes)
      break;
    classes = next_classes;
  }
  return rank;
}

std::string atom_token(const WriterGraph &g, int i) {
  const Atom &a = g.mol.atom(i);
  const ElementInfo *info = element_info(a.element);
  std::string symbol = info ? std::string(info->symbol) : "*";
  if (a.aromatic)
    symbol[0] =
        static_cast<char>(std::tolower(static_cast<unsigned char>(symbol[0])));

  const int map = g.maps ? a.map : 0;
  const bool implicit_ok = g.hydrogens[i] == g.mol.implicit_hydrogens(i);
  const bool bare = is_organic_subset(a.element) && a.charge == 0 && map == 0
                    && implicit_ok
                    && (!a.aromatic || has_aromatic_form(a.element));
  if (bare)
    return symbol;

  std::string out = "[" + symbol;
  const int h = g.hydrogens[i];
  if (h > 0) {
    out += 'H';
    if (h > 1)
      out += std::to_string(h);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1)
      out += std::to_string(std::abs(a.charge));
  }
  if (map > 0)
    out += ":" + std::to_string(map);
  out += ']';
  return out;
}

std::string bond_token(const WriterGraph &g, int k) {
  const Bond &b = g.mol.bond(k);
  const bool both_aromatic =
      g.mol.atom(b.src).aromatic && g.mol.atom(b.dst).aromatic;
  switch (b.type) {
  case BondType::kSingle:
    return both_aromatic ? "-" : "";
  case BondType::kDouble:
    return "=";
  case BondType::kTriple:
    return "#";
  case BondType::kAromatic:
    return both_aromatic && g.ring[k] ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) {
  return digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit);
}

struct Emitted {
  std::string text;
  std::vector<int> order;
};

// Depth-first emission of one component from `root`, neighbors taken in
// rank order.
class Emitter {
public:
  Emitter(const WriterGraph &g, const Ranking &rank)
      : g_(g), rank_(rank), n_(g.mol.num_atoms()), visited_(n_, false),
        position_(n_, -1), is_tree_(g.mol.num_bonds(), false),
        ring_digit_(g.mol.num_bonds(), -1), sorted_(n_) {
    for (int i = 0; i < n_; ++i) {
      auto nbs = g.mol.neighbors(i);
      sorted_[i].assign(nbs.begin(), nbs.end());
      std::sort(sorted_[i].begin(), sorted_[i].end(),
                [&](const Neighbor &a, const Neighbor &b) {
                  return rank_[a.atom] < rank_[b.atom];
                });
    }
  }

  Emitted emit_component(int root) {
    mark_tree(root);
    Emitted out;
    emit(root, out);
    return out;
  }

private:
  void mark_tree(int root) {
    std::vector<std::pair<int, std::size_t>> stack = { { root, 0 } };
    visited_[root] = true;
    while (!stack.empty()) {
      auto &[u, next] = stack.back();
      if (next == sorted_[u].size()) {
        stack.pop_back();
        continue;
      }
      const Neighbor nb = sorted_[u][next++];
      if (visited_[nb.atom])
        continue;
      visited_[nb.atom] = true;
      is_tree_[nb.bond] = true;
      children_[u].push_back(nb);
      stack.push_back({ nb.atom, 0 });
    }
  }

  int take_digit() {
    int d = 1;
    while (used_digits_.count(d))
      ++d;
    used_digits_.insert(d);
    return d;
  }

  void emit(int root, Emitted &out) {
    // Explicit stack: (atom, incoming bond, child cursor, phase).
    struct Frame {
      int atom;
      int in_bond;
      std::size_t child;
      bool opened_paren;
    };
    std::vector<Frame> stack = { { root, -1, 0, false } };
    write_atom(root, out);
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &kids = children_[f.atom];
      if (f.child == kids.size()) {
        const bool paren = f.opened_paren;
        stack.pop_back();
        if (paren)
          out.text += ')';
        continue;
      }
      const Neighbor nb = kids[f.child++];
      const bool last = f.child == kids.size();
      if (!last)
        out.text += '(';
      out.text += bond_token(g_, nb.bond);
      stack.push_back({ nb.atom, nb.bond, 0, !last });
      write_atom(nb.atom, out);
    }
  }

  void write_atom(int u, Emitted &out) {
    position_[u] = static_cast<int>(out.order.size());
    out.order.push_back(u);
    out.text += atom_token(g_, u);

    std::vector<Neighbor> closing, opening;
    for (const Neighbor &nb: sorted_[u]) {
      if (is_tree_[nb.bond])
        continue;
      (ring_digit_[nb.bond] >= 0 ? closing : opening).push_back(nb);
    }
    std::vector<int> released;
    for (const Neighbor &nb: closing) {
      out.text += ring_label(ring_digit_[nb.bond]);
      released.push_back(ring_digit_[nb.bond]);
    }
    for (const Neighbor &nb: opening) {
      const int d = take_digit();
      ring_digit_[nb.bond] = d;
      out.text += bond_token(g_, nb.bond) + ring_label(d);
    }
    for (int d: released)
      used_digits_.erase(d);
  }

  const WriterGraph &g_;
  const Ranking &rank_;
  int n_;
  std::vector<bool> visited_;
  std::vector<int> position_;
  std::vector<bool> is_tree_;
  std::vector<int> ring_digit_;
  std::vector<std::vector<Neighbor>> sorted_;
  std::map<int, std::vector<Neighbor>> children_;
  std::set<int> used_digits_;
};

Emitted emit_all(const WriterGraph &g, const Ranking &rank) {
  const std::vector<int> comp = connected_components(g.mol);
  const int n = g.mol.num_atoms();
  std::map<int, int> root_of;
  for (int i = 0; i < n; ++i) {
    auto it = root_of.find(comp[i]);
    if (it == root_of.end() || rank[i] < rank[it->second])
      root_of[comp[i]] = i;
  }

  Emitter emitter(g, rank);
  std::vector<Emitted> parts;
  for (const auto &[c, root]: root_of)
    parts.push_back(emitter.emit_component(root));
  std::sort(parts.begin(), parts.end(),
            [](const Emitted &a, const Emitted &b) {
              return a.text < b.text;
            });

  Emitted all;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k > 0)
      all.text += '.';
    all.text += parts[k].text;
    all.order.insert(all.order.end(), parts[k].order.begin(),
                     parts[k].order.end());
  }
  return all;
}

class CanonicalSearch {
public:
  CanonicalSearch(const WriterGraph &g, int max_leaves)
      : g_(g), max_leaves_(max_leaves) {}

  Emitted run() {
    search(refine(g_, initial_ranks(g_)));
    return std::move(best_);
  }

private:
  void search(const Ranking &rank) {
    const int n = static_cast<int>(rank.size());
    if (num_classes(rank) == n) {
      ++leaves_;
      Emitted e = emit_all(g_, rank);
      if (!have_best_ || e.text < best_.text) {
        best_ = std::move(e);
        have_best_ = true;
      }
      return;
    }

    // Branch on the first non-singleton class.
    std::vector<int> size(n, 0);
    for (int r: rank)
      ++size[r];
    int target = 0;
    while (size[target] < 2)
      ++target;

    for (int v = 0; v < n; ++v) {
      if (rank[v] != target)
        continue;
      if (have_best_ && leaves_ >= max_leaves_)
        return;
      Ranking split(n);
      for (int i = 0; i < n; ++i)
        split[i] = 2 * rank[i] + (rank[i] == target && i != v ? 1 : 0);
      search(refine(g_, dense_ranks(split)));
    }
  }

  const WriterGraph &g_;
  int max_leaves_;
  int leaves_ = 0;
  bool have_best_ = false;
  Emitted best_;
};
}  // namespace

Molecule parse_smiles(std::string_view text) {
  return Parser(text).run();
}

std::string write_smiles(const Molecule &mol, const SmilesWriteOptions &options,
                         std::vector<int> *order) {
  WriterGraph g { mol, options.atom_maps, {}, ring_bonds(mol) };
  for (int i = 0; i < mol.num_atoms(); ++i)
    g.hydrogens.push_back(mol.total_hydrogens(i));

  Emitted best = CanonicalSearch(g, options.max_leaves).run();
  if (order)
    *order = std::move(best.order);
  return best.text;
}

std::string canonical_smiles(const Molecule &mol) {
  return write_smiles(mol, { .atom_maps = false });
}

std::string canonical_smiles_set(const std::vector<Molecule> &mols) {
  std::vector<std::string> parts;
  for (const Molecule &m: mols) {
    const std::string s = canonical_smiles(m);
    std::size_t start = 0;
    while (start <= s.size() && !s.empty()) {
      const std::size_t dot = s.find('.', start);
      parts.push_back(s.substr(start, dot - start));
      if (dot == std::string::npos)
        break;
      start = dot + 1;
    }
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k > 0)
      out += '.';
    out += parts[k];
  }
  return out;
}

}  // namespace dualretro
