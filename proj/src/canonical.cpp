//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Canonical SMILES via iterative Morgan-style color refinement with
// individualization backtracking: when refinement stalls on a tied class,
// each member is individualized in turn and the lexicographically least of
// the resulting strings wins.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "differ/smiles.hpp"

namespace differ::smiles {

namespace detail {
std::string write_with_ranks(const MolGraph& g, int root,
                             const std::vector<int>& ranks);
}

namespace {

constexpr int kMaxLeaves = 20000;

struct InitialKey {
  std::string element;
  bool aromatic;
  int charge, isotope, hcount, chirality, degree;
  auto tie() const {
    return std::tie(element, aromatic, charge, isotope, hcount, chirality,
                    degree);
  }
  bool operator<(const InitialKey& o) const { return tie() < o.tie(); }
};

int edge_color(const Bond& b) {
  return static_cast<int>(b.order) * 4 + static_cast<int>(b.stereo);
}

// partition refinement: colors become ranks of (color, sorted neighbor
// (edge color, neighbor color) multiset); iterate until the class count
// stops growing
void refine(const MolGraph& g, std::vector<int>& colors) {
  const std::size_t n = g.atoms.size();
  int classes = 1 + *std::max_element(colors.begin(), colors.end());
  while (true) {
    std::vector<std::pair<std::vector<long long>, int>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<long long> key{colors[i]};
      std::vector<long long> nbr;
      for (auto [v, b] : g.neighbors(static_cast<int>(i)))
        nbr.push_back(static_cast<long long>(edge_color(g.bonds[b])) * 1000000 +
                      colors[v]);
      std::sort(nbr.begin(), nbr.end());
      key.insert(key.end(), nbr.begin(), nbr.end());
      keys[i] = {std::move(key), static_cast<int>(i)};
    }
    auto sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    int next = -1;
    std::vector<int> fresh(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || sorted[i].first != sorted[i - 1].first) ++next;
      fresh[sorted[i].second] = next;
    }
    const int fresh_classes = next + 1;
    colors = std::move(fresh);
    if (fresh_classes == classes) break;
    classes = fresh_classes;
  }
}

struct Solver {
  const MolGraph& g;
  int root_hint;  // unused; component graphs are whole graphs here
  std::string best;
  int leaves = 0;

  explicit Solver(const MolGraph& graph) : g(graph), root_hint(-1) {}

  void solve(std::vector<int> colors) {
    refine(g, colors);
    const std::size_t n = g.atoms.size();
    // find smallest tied color class
    int tied_color = -1;
    std::vector<int> members;
    for (int c = 0; c < static_cast<int>(n) && tied_color < 0; ++c) {
      members.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (colors[i] == c) members.push_back(static_cast<int>(i));
      if (members.size() >= 2) tied_color = c;
    }
    if (tied_color < 0) {
      if (++leaves > kMaxLeaves)
        throw std::runtime_error("canonical: symmetry search exceeded budget");
      int root = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (colors[i] == 0) root = static_cast<int>(i);
      std::string s = detail::write_with_ranks(g, root, colors);
      if (best.empty() || s < best) best = std::move(s);
      return;
    }
    for (int a : members) {
      std::vector<int> branched(n);
      for (std::size_t i = 0; i < n; ++i)
        branched[i] = colors[i] * 2 +
                      (static_cast<int>(i) == a || colors[i] != tied_color ? 0 : 1);
      solve(std::move(branched));
    }
  }
};

MolGraph component_subgraph(const MolGraph& g, const std::vector<int>& atoms) {
  MolGraph sub;
  std::map<int, int> remap;
  for (int a : atoms) remap[a] = sub.add_atom(g.atoms[a]);
  for (const Bond& b : g.bonds) {
    auto ia = remap.find(b.a), ib = remap.find(b.b);
    if (ia != remap.end() && ib != remap.end())
      sub.add_bond(ia->second, ib->second, b.order, b.stereo);
  }
  return sub;
}

std::string canonical_component(const MolGraph& comp) {
  const std::size_t n = comp.atoms.size();
  std::vector<InitialKey> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = comp.atoms[i];
    raw[i] = {a.element,
              a.aromatic,
              a.formal_charge,
              a.isotope,
              hydrogen_count(comp, static_cast<int>(i)),
              static_cast<int>(a.chirality),
              static_cast<int>(comp.neighbors(static_cast<int>(i)).size())};
  }
  std::vector<InitialKey> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [](const InitialKey& x, const InitialKey& y) {
                             return !(x < y) && !(y < x);
                           }),
               sorted.end());
  std::vector<int> colors(n);
  for (std::size_t i = 0; i < n; ++i)
    colors[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), raw[i]) -
        sorted.begin());
  Solver solver(comp);
  solver.solve(std::move(colors));
  return solver.best;
}

}  // namespace

std::string canonical(const MolGraph& g) {
  if (g.empty()) throw std::invalid_argument("canonical: empty graph");
  MolGraph norm = normalize(g);
  std::vector<std::string> parts;
  for (const auto& comp : norm.components())
    parts.push_back(canonical_component(component_subgraph(norm, comp)));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ".";
    out += parts[i];
  }
  return out;
}

std::string canonical(const std::string& smiles_text) {
  return canonical(parse(smiles_text));
}

}  // namespace differ::smiles
