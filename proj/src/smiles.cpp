//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace differ::smiles {

namespace {

const std::set<std::string> kOrganicSubset = {"B", "C",  "N",  "O", "P",
                                              "S", "F", "Cl", "Br", "I"};
const std::set<std::string> kAromaticElements = {"B", "C", "N", "O", "P", "S"};
const std::set<std::string> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "K",  "Ca", "Ti", "Cr", "Mn", "Fe", "Co",
    "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Zr", "Pd", "Ag", "Cd",
    "Sn", "Sb", "Te", "I",  "Pt", "Au", "Hg", "Pb", "Bi"};
const std::set<std::string> kTwoLetterBare = {"Cl", "Br", "Si", "Se"};

// allowed valences, smallest first
const std::map<std::string, std::vector<int>> kValences = {
    {"B", {3}},  {"C", {4}},  {"N", {3, 5}}, {"O", {2}},      {"P", {3, 5}},
    {"S", {2, 4, 6}}, {"F", {1}}, {"Cl", {1}}, {"Br", {1}}, {"I", {1}}};

double order_weight(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 1.0;
    case BondOrder::Double: return 2.0;
    case BondOrder::Triple: return 3.0;
    case BondOrder::Aromatic: return 1.5;
  }
  return 1.0;
}

}  // namespace

bool element_supported(const std::string& symbol) {
  return kElements.count(symbol) > 0;
}

int MolGraph::add_atom(Atom a) {
  atoms.push_back(std::move(a));
  return static_cast<int>(atoms.size()) - 1;
}

void MolGraph::add_bond(int a, int b, BondOrder order, BondStereo stereo) {
  const int n = static_cast<int>(atoms.size());
  if (a < 0 || b < 0 || a >= n || b >= n)
    throw std::out_of_range("add_bond: atom index out of range");
  if (a == b) throw std::invalid_argument("add_bond: self bond");
  if (bond_between(a, b) >= 0)
    throw std::invalid_argument("add_bond: duplicate bond");
  bonds.push_back({a, b, order, stereo});
}

std::vector<std::pair<int, int>> MolGraph::neighbors(int atom) const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    if (bonds[i].a == atom) out.emplace_back(bonds[i].b, static_cast<int>(i));
    if (bonds[i].b == atom) out.emplace_back(bonds[i].a, static_cast<int>(i));
  }
  return out;
}

int MolGraph::bond_between(int a, int b) const {
  for (std::size_t i = 0; i < bonds.size(); ++i)
    if ((bonds[i].a == a && bonds[i].b == b) ||
        (bonds[i].a == b && bonds[i].b == a))
      return static_cast<int>(i);
  return -1;
}

std::vector<std::vector<int>> MolGraph::components() const {
  std::vector<std::vector<int>> comps;
  std::vector<bool> seen(atoms.size(), false);
  for (std::size_t s = 0; s < atoms.size(); ++s) {
    if (seen[s]) continue;
    std::vector<int> comp, stack{static_cast<int>(s)};
    seen[s] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (auto [v, b] : neighbors(u))
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

int hydrogen_count(const MolGraph& g, int atom) {
  const Atom& a = g.atoms[atom];
  if (a.explicit_h >= 0) return a.explicit_h;
  if (a.bracket) return 0;
  auto it = kValences.find(a.element);
  if (it == kValences.end()) return 0;
  double sum = 0.0;
  for (auto [v, b] : g.neighbors(atom)) sum += order_weight(g.bonds[b].order);
  const int need = static_cast<int>(std::ceil(sum - 1e-9));
  for (int v : it->second)
    if (v >= need) return v - need;
  return 0;
}

// ---------------------------------------------------------------------------
// lexer

std::vector<Token> lex(const std::string& text) {
  if (text.empty()) throw LexError("empty input", 0);
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (static_cast<unsigned char>(c) >= 0x80)
      throw LexError("non-ASCII byte", i);
    if (c == '[') {
      std::size_t j = i + 1;
      while (j < n && text[j] != ']') ++j;
      if (j == n) throw LexError("unterminated bracket atom", i);
      tokens.push_back({text.substr(i, j - i + 1), i});
      i = j + 1;
    } else if (c == '%') {
      if (i + 2 >= n || !std::isdigit(text[i + 1]) || !std::isdigit(text[i + 2]))
        throw LexError("%% ring closure needs two digits", i);
      tokens.push_back({text.substr(i, 3), i});
      i += 3;
    } else if (std::isdigit(c)) {
      tokens.push_back({text.substr(i, 1), i});
      ++i;
    } else if (std::isupper(c)) {
      if (i + 1 < n && std::islower(text[i + 1]) &&
          kTwoLetterBare.count(text.substr(i, 2))) {
        tokens.push_back({text.substr(i, 2), i});
        i += 2;
      } else if (kOrganicSubset.count(text.substr(i, 1)) ||
                 text.substr(i, 1) == "H") {
        tokens.push_back({text.substr(i, 1), i});
        ++i;
      } else {
        throw LexError(std::string("unknown atom symbol '") + c + "'", i);
      }
    } else if (std::islower(c)) {
      if (std::string("bcnops").find(c) == std::string::npos)
        throw LexError(std::string("unknown aromatic symbol '") + c + "'", i);
      tokens.push_back({text.substr(i, 1), i});
      ++i;
    } else if (std::string("-=#:/\\().").find(c) != std::string::npos) {
      tokens.push_back({text.substr(i, 1), i});
      ++i;
    } else {
      throw LexError(std::string("unknown character '") + c + "'", i);
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// parser

namespace {

Atom parse_bracket(const std::string& tok, std::size_t token_index) {
  // [isotope? symbol chiral? Hcount? charge? :map?]
  Atom atom;
  atom.bracket = true;
  std::size_t i = 1;  // skip '['
  const std::size_t end = tok.size() - 1;
  auto read_int = [&]() {
    int v = 0;
    while (i < end && std::isdigit(tok[i])) v = v * 10 + (tok[i++] - '0');
    return v;
  };
  if (i < end && std::isdigit(tok[i])) atom.isotope = read_int();
  if (i >= end) throw ParseError("bracket atom missing element", token_index);
  if (std::isupper(tok[i])) {
    std::string sym(1, tok[i++]);
    if (i < end && std::islower(tok[i]) &&
        element_supported(sym + tok[i]))
      sym += tok[i++];
    atom.element = sym;
  } else if (std::islower(tok[i])) {
    std::string sym(1, tok[i]);
    sym[0] = static_cast<char>(std::toupper(sym[0]));
    if (i + 1 < end && std::islower(tok[i + 1])) {
      // two-letter aromatic like [se]
      std::string two = sym + tok[i + 1];
      if (element_supported(two)) {
        atom.element = two;
        atom.aromatic = true;
        i += 2;
      }
    }
    if (atom.element.empty()) {
      if (!kAromaticElements.count(sym))
        throw ParseError("element cannot be aromatic: " + sym, token_index);
      atom.element = sym;
      atom.aromatic = true;
      ++i;
    }
  } else {
    throw ParseError("bracket atom missing element", token_index);
  }
  if (!element_supported(atom.element))
    throw ParseError("unsupported element " + atom.element, token_index);
  if (i < end && tok[i] == '@') {
    ++i;
    if (i < end && tok[i] == '@') {
      atom.chirality = Chirality::Cw;
      ++i;
    } else {
      atom.chirality = Chirality::Ccw;
    }
  }
  if (i < end && tok[i] == 'H') {
    ++i;
    atom.explicit_h = (i < end && std::isdigit(tok[i])) ? read_int() : 1;
  } else {
    atom.explicit_h = 0;
  }
  while (i < end && (tok[i] == '+' || tok[i] == '-')) {
    const int sign = tok[i] == '+' ? 1 : -1;
    ++i;
    if (i < end && std::isdigit(tok[i]))
      atom.formal_charge += sign * read_int();
    else {
      atom.formal_charge += sign;
      while (i < end && tok[i] == (sign > 0 ? '+' : '-')) {
        atom.formal_charge += sign;
        ++i;
      }
    }
  }
  if (i < end && tok[i] == ':') {
    ++i;
    if (i >= end || !std::isdigit(tok[i]))
      throw ParseError("atom map needs digits", token_index);
    atom.atom_map = read_int();
    if (atom.atom_map <= 0)
      throw ParseError("atom map must be positive", token_index);
  }
  if (i != end)
    throw ParseError("trailing characters in bracket atom: " + tok,
                     token_index);
  return atom;
}

struct PendingBond {
  BondOrder order = BondOrder::Single;
  BondStereo stereo = BondStereo::None;
  bool explicit_order = false;
};

}  // namespace

MolGraph parse_tokens(const std::vector<Token>& tokens) {
  MolGraph g;
  int current = -1;
  std::vector<int> branch_stack;
  std::optional<PendingBond> pending;
  struct RingOpen {
    int atom;
    std::optional<PendingBond> bond;
    std::size_t token_index;
  };
  std::map<int, RingOpen> open_rings;

  auto connect = [&](int a, int b, std::optional<PendingBond> pb,
                     std::size_t idx) {
    BondOrder order;
    BondStereo stereo = BondStereo::None;
    const bool both_aromatic = g.atoms[a].aromatic && g.atoms[b].aromatic;
    if (pb && pb->explicit_order) {
      order = pb->order;
      stereo = pb->stereo;
      if (order == BondOrder::Aromatic && !both_aromatic)
        throw ParseError("aromatic bond between non-aromatic atoms", idx);
    } else {
      order = both_aromatic ? BondOrder::Aromatic : BondOrder::Single;
    }
    if (g.bond_between(a, b) >= 0) throw ParseError("duplicate bond", idx);
    if (a == b) throw ParseError("ring bond to the same atom", idx);
    g.add_bond(a, b, order, stereo);
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i].text;
    const char c = t[0];
    if (c == '[' || std::isalpha(c)) {
      Atom atom;
      if (c == '[') {
        atom = parse_bracket(t, i);
      } else if (std::islower(c)) {
        atom.element = t;
        atom.element[0] = static_cast<char>(std::toupper(atom.element[0]));
        atom.aromatic = true;
      } else {
        if (t == "H")
          throw ParseError("H must appear inside a bracket atom", i);
        atom.element = t;
      }
      const int idx = g.add_atom(atom);
      if (current >= 0) connect(current, idx, pending, i);
      else if (pending)
        throw ParseError("bond symbol with no preceding atom", i);
      pending.reset();
      current = idx;
    } else if (std::isdigit(c) || c == '%') {
      if (current < 0)
        throw ParseError("ring closure with no preceding atom", i);
      const int num = c == '%' ? std::stoi(t.substr(1)) : t[0] - '0';
      auto it = open_rings.find(num);
      if (it == open_rings.end()) {
        open_rings[num] = {current, pending, i};
      } else {
        std::optional<PendingBond> pb = pending;
        if (it->second.bond && it->second.bond->explicit_order) {
          if (pb && pb->explicit_order &&
              pb->order != it->second.bond->order)
            throw ParseError("conflicting ring closure bond orders", i);
          if (!pb || !pb->explicit_order) pb = it->second.bond;
        }
        connect(it->second.atom, current, pb, i);
        open_rings.erase(it);
      }
      pending.reset();
    } else if (c == '(') {
      if (current < 0) throw ParseError("branch with no preceding atom", i);
      branch_stack.push_back(current);
    } else if (c == ')') {
      if (branch_stack.empty()) throw ParseError("unmatched ')'", i);
      if (pending) throw ParseError("dangling bond before ')'", i);
      current = branch_stack.back();
      branch_stack.pop_back();
    } else if (c == '.') {
      if (pending) throw ParseError("bond before '.'", i);
      current = -1;
    } else {  // bond symbol
      if (pending) throw ParseError("two bond symbols in a row", i);
      PendingBond pb;
      pb.explicit_order = true;
      switch (c) {
        case '-': pb.order = BondOrder::Single; break;
        case '=': pb.order = BondOrder::Double; break;
        case '#': pb.order = BondOrder::Triple; break;
        case ':': pb.order = BondOrder::Aromatic; break;
        case '/':
          pb.order = BondOrder::Single;
          pb.stereo = BondStereo::Up;
          break;
        case '\\':
          pb.order = BondOrder::Single;
          pb.stereo = BondStereo::Down;
          break;
        default:
          throw ParseError("unexpected token " + t, i);
      }
      pending = pb;
    }
  }
  if (!branch_stack.empty())
    throw ParseError("unclosed branch", tokens.size() - 1);
  if (!open_rings.empty()) {
    const auto& r = *open_rings.begin();
    throw ParseError("ring bond " + std::to_string(r.first) + " never closed",
                     r.second.token_index);
  }
  if (pending) throw ParseError("dangling bond at end", tokens.size() - 1);
  return g;
}

MolGraph parse(const std::string& text) { return parse_tokens(lex(text)); }

// ---------------------------------------------------------------------------
// writer

namespace {

bool needs_bracket(const Atom& a, bool include_map) {
  if (a.isotope || a.formal_charge || a.explicit_h >= 0 ||
      a.chirality != Chirality::None)
    return true;
  if (include_map && a.atom_map) return true;
  if (a.aromatic) return !kAromaticElements.count(a.element) ||
                         !kOrganicSubset.count(a.element);
  return !kOrganicSubset.count(a.element);
}

std::string atom_string(const Atom& a, bool include_map) {
  std::string sym = a.element;
  if (a.aromatic)
    for (auto& ch : sym) ch = static_cast<char>(std::tolower(ch));
  if (!needs_bracket(a, include_map)) return sym;
  std::string out = "[";
  if (a.isotope) out += std::to_string(a.isotope);
  out += sym;
  if (a.chirality == Chirality::Ccw) out += "@";
  if (a.chirality == Chirality::Cw) out += "@@";
  const int h = a.explicit_h >= 0 ? a.explicit_h : 0;
  if (h == 1) out += "H";
  else if (h > 1) out += "H" + std::to_string(h);
  if (a.formal_charge == 1) out += "+";
  else if (a.formal_charge == -1) out += "-";
  else if (a.formal_charge > 1) out += "+" + std::to_string(a.formal_charge);
  else if (a.formal_charge < -1) out += "-" + std::to_string(-a.formal_charge);
  if (include_map && a.atom_map) out += ":" + std::to_string(a.atom_map);
  out += "]";
  return out;
}

struct Writer {
  const MolGraph& g;
  const WriteOptions& opts;
  std::vector<bool> visited;
  std::vector<bool> bond_used;
  std::vector<std::vector<int>> children;   // ordered child atoms
  std::vector<std::vector<int>> ring_nums;  // ring closure numbers per atom
  std::vector<std::vector<int>> ring_bonds; // matching bond index per number
  int next_ring = 1;
  const std::vector<int>* ranks = nullptr;  // optional canonical ranks

  Writer(const MolGraph& graph, const WriteOptions& o)
      : g(graph),
        opts(o),
        visited(graph.atoms.size(), false),
        bond_used(graph.bonds.size(), false),
        children(graph.atoms.size()),
        ring_nums(graph.atoms.size()),
        ring_bonds(graph.atoms.size()) {}

  std::vector<std::pair<int, int>> ordered_neighbors(int u) {
    auto nb = g.neighbors(u);
    switch (opts.order) {
      case WriteOptions::Order::ByIndex:
        std::sort(nb.begin(), nb.end());
        break;
      case WriteOptions::Order::ByMap:
        std::stable_sort(nb.begin(), nb.end(), [&](auto x, auto y) {
          const int mx = g.atoms[x.first].atom_map;
          const int my = g.atoms[y.first].atom_map;
          if ((mx > 0) != (my > 0)) return mx > 0;  // mapped first
          if (mx != my) return mx < my;
          return x.first < y.first;
        });
        break;
      case WriteOptions::Order::Shuffled: {
        std::sort(nb.begin(), nb.end());
        for (std::size_t i = nb.size(); i > 1; --i)
          std::swap(nb[i - 1], nb[opts.rng->uniform_int(i)]);
        break;
      }
    }
    if (ranks)
      std::sort(nb.begin(), nb.end(), [&](auto x, auto y) {
        return (*ranks)[x.first] < (*ranks)[y.first];
      });
    return nb;
  }

  void plan(int u) {
    visited[u] = true;
    for (auto [v, b] : ordered_neighbors(u)) {
      if (bond_used[b]) continue;
      if (!visited[v]) {
        bond_used[b] = true;
        children[u].push_back(v);
        plan(v);
      } else {
        bond_used[b] = true;
        if (next_ring > 99)
          throw std::runtime_error("write: more than 99 ring closures");
        const int num = next_ring++;
        ring_nums[v].push_back(num);
        ring_bonds[v].push_back(-1);  // opening end, no bond symbol
        ring_nums[u].push_back(num);
        ring_bonds[u].push_back(b);   // closing end carries the symbol
      }
    }
  }

  std::string bond_symbol(const Bond& bond, int from) const {
    if (bond.stereo == BondStereo::Up)
      return bond.a == from ? "/" : "\\";
    if (bond.stereo == BondStereo::Down)
      return bond.a == from ? "\\" : "/";
    switch (bond.order) {
      case BondOrder::Single: {
        const bool both_arom =
            g.atoms[bond.a].aromatic && g.atoms[bond.b].aromatic;
        return both_arom ? "-" : "";
      }
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic: return "";
    }
    return "";
  }

  void emit(int u, std::string& out) const {
    out += atom_string(g.atoms[u], opts.include_maps);
    for (std::size_t i = 0; i < ring_nums[u].size(); ++i) {
      if (ring_bonds[u][i] >= 0)
        out += bond_symbol(g.bonds[ring_bonds[u][i]], u);
      const int num = ring_nums[u][i];
      out += num < 10 ? std::to_string(num) : "%" + std::to_string(num);
    }
    for (std::size_t i = 0; i < children[u].size(); ++i) {
      const int c = children[u][i];
      const int b = g.bond_between(u, c);
      const bool last = i + 1 == children[u].size();
      if (!last) out += "(";
      out += bond_symbol(g.bonds[b], u);
      emit(c, out);
      if (!last) out += ")";
    }
  }
};

}  // namespace

std::string write_component(const MolGraph& g, int root,
                            const WriteOptions& opts) {
  if (root < 0 || root >= static_cast<int>(g.atoms.size()))
    throw std::out_of_range("write_component: root out of range");
  Writer w(g, opts);
  w.plan(root);
  std::string out;
  w.emit(root, out);
  return out;
}

namespace detail {
std::string write_with_ranks(const MolGraph& g, int root,
                             const std::vector<int>& ranks) {
  WriteOptions opts;
  opts.include_maps = false;
  Writer w(g, opts);
  w.ranks = &ranks;
  w.plan(root);
  std::string out;
  w.emit(root, out);
  return out;
}
}  // namespace detail

std::string write(const MolGraph& g, int root, const WriteOptions& opts) {
  if (g.empty()) throw std::invalid_argument("write: empty graph");
  auto comps = g.components();
  // component holding the root goes first
  std::stable_sort(comps.begin(), comps.end(),
                   [&](const auto& a, const auto& b) {
                     const bool ra =
                         std::find(a.begin(), a.end(), root) != a.end();
                     const bool rb =
                         std::find(b.begin(), b.end(), root) != b.end();
                     if (ra != rb) return ra;
                     return a[0] < b[0];
                   });
  std::string out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    int r;
    const auto& comp = comps[i];
    if (std::find(comp.begin(), comp.end(), root) != comp.end()) {
      r = root;
    } else if (opts.order == WriteOptions::Order::Shuffled) {
      r = comp[opts.rng->uniform_int(comp.size())];
    } else if (opts.order == WriteOptions::Order::ByMap) {
      r = *std::min_element(comp.begin(), comp.end(), [&](int x, int y) {
        const int mx = g.atoms[x].atom_map, my = g.atoms[y].atom_map;
        if ((mx > 0) != (my > 0)) return mx > 0;
        if (mx != my) return mx < my;
        return x < y;
      });
    } else {
      r = comp[0];
    }
    if (i) out += ".";
    out += write_component(g, r, opts);
  }
  return out;
}

std::string random_rooted(const MolGraph& g, Rng& rng) {
  if (g.empty()) throw std::invalid_argument("random_rooted: empty graph");
  const int root = static_cast<int>(rng.uniform_int(g.atoms.size()));
  WriteOptions opts;
  opts.order = WriteOptions::Order::Shuffled;
  opts.rng = &rng;
  return write(g, root, opts);
}

std::pair<std::string, std::string> root_align(const MolGraph& product,
                                               const MolGraph& reactants,
                                               int product_root) {
  if (product_root < 0 ||
      product_root >= static_cast<int>(product.atoms.size()))
    throw AlignError("root_align: product root out of range");
  const int map = product.atoms[product_root].atom_map;
  if (map == 0) throw AlignError("root_align: product root has no atom map");
  int match = -1;
  for (std::size_t i = 0; i < reactants.atoms.size(); ++i)
    if (reactants.atoms[i].atom_map == map) {
      match = static_cast<int>(i);
      break;
    }
  if (match < 0)
    throw AlignError("root_align: atom map " + std::to_string(map) +
                     " absent from reactants");
  WriteOptions opts;
  opts.include_maps = false;
  opts.order = WriteOptions::Order::ByMap;
  // normalize() keeps the atom maps the ByMap ordering needs out of the
  // output while dropping the brackets that only existed to carry them
  MolGraph p = normalize(product);
  MolGraph r = normalize(reactants);
  for (std::size_t i = 0; i < p.atoms.size(); ++i)
    p.atoms[i].atom_map = product.atoms[i].atom_map;
  for (std::size_t i = 0; i < r.atoms.size(); ++i)
    r.atoms[i].atom_map = reactants.atoms[i].atom_map;
  return {write(p, product_root, opts), write(r, match, opts)};
}

MolGraph strip_atom_maps(MolGraph g) {
  for (auto& a : g.atoms) a.atom_map = 0;
  return g;
}

MolGraph normalize(MolGraph g) {
  for (auto& a : g.atoms) a.atom_map = 0;
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    Atom& a = g.atoms[i];
    if (a.explicit_h < 0) continue;
    if (a.isotope || a.formal_charge || a.chirality != Chirality::None)
      continue;
    Atom bare = a;
    bare.explicit_h = -1;
    bare.bracket = false;
    MolGraph probe = g;
    probe.atoms[i] = bare;
    if (hydrogen_count(probe, static_cast<int>(i)) == a.explicit_h) {
      a.explicit_h = -1;
      a.bracket = false;
    }
  }
  return g;
}

}  // namespace differ::smiles
