//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/synth.hpp"

#include <fstream>
#include <map>

#include "differ/rng.hpp"

namespace differ::synth {

using smiles::Atom;
using smiles::BondOrder;
using smiles::MolGraph;

namespace {

Atom plain(const std::string& element) {
  Atom a;
  a.element = element;
  return a;
}

int free_valence(const MolGraph& g, int atom) {
  return smiles::hydrogen_count(g, atom);
}

// Random acyclic fragment of size heavy atoms; atom 0 is always a carbon so
// it can serve as the attachment point. Heteroatoms never touch each other.
MolGraph random_fragment(Rng& rng, std::size_t size) {
  MolGraph g;
  g.add_atom(plain("C"));
  while (g.atoms.size() < size) {
    // pick a parent with room
    std::vector<int> open;
    for (std::size_t i = 0; i < g.atoms.size(); ++i)
      if (free_valence(g, static_cast<int>(i)) > 0)
        open.push_back(static_cast<int>(i));
    if (open.empty()) break;
    const int parent = open[rng.uniform_int(open.size())];
    std::string elem = "C";
    const double u = rng.uniform();
    if (g.atoms[parent].element == "C") {
      if (u < 0.15)
        elem = "O";
      else if (u < 0.25)
        elem = "N";
    }
    const int child = g.add_atom(plain(elem));
    g.add_bond(parent, child, BondOrder::Single);
  }
  return g;
}

// append src into dst, returning the index offset
int append(MolGraph& dst, const MolGraph& src) {
  const int off = static_cast<int>(dst.atoms.size());
  for (const auto& a : src.atoms) dst.add_atom(a);
  for (const auto& b : src.bonds)
    dst.add_bond(b.a + off, b.b + off, b.order, b.stereo);
  return off;
}

void number_atoms(MolGraph& g) {
  for (std::size_t i = 0; i < g.atoms.size(); ++i)
    g.atoms[i].atom_map = static_cast<int>(i) + 1;
}

// copy of g keeping the atom maps already present
MolGraph mapped_copy(const MolGraph& g) { return g; }

std::string reaction_line(const MolGraph& reactants, const MolGraph& product) {
  smiles::WriteOptions opts;
  opts.include_maps = true;
  return smiles::write(reactants, 0, opts) + ">>" +
         smiles::write(product, 0, opts);
}

// A-C(=O)-O-B  =>  A-C(=O)-OH . HO-B   (ester oxygen leaves with B)
std::string make_ester(Rng& rng) {
  MolGraph a = random_fragment(rng, 2 + rng.uniform_int(4));
  MolGraph b = random_fragment(rng, 2 + rng.uniform_int(4));
  MolGraph product = a;
  const int carbonyl = product.add_atom(plain("C"));
  const int oxo = product.add_atom(plain("O"));
  const int ester_o = product.add_atom(plain("O"));
  product.add_bond(0, carbonyl, BondOrder::Single);
  product.add_bond(carbonyl, oxo, BondOrder::Double);
  product.add_bond(carbonyl, ester_o, BondOrder::Single);
  const int boff = append(product, b);
  product.add_bond(ester_o, boff, BondOrder::Single);
  number_atoms(product);

  MolGraph reactants;
  // acid: fragment a + carbonyl + =O keep their maps; the new hydroxyl
  // oxygen comes from water and is unmapped
  MolGraph acid = mapped_copy(a);
  for (std::size_t i = 0; i < acid.atoms.size(); ++i)
    acid.atoms[i].atom_map = product.atoms[i].atom_map;
  const int rc = acid.add_atom(product.atoms[carbonyl]);
  const int ro = acid.add_atom(product.atoms[oxo]);
  const int roh = acid.add_atom(plain("O"));
  acid.add_bond(0, rc, BondOrder::Single);
  acid.add_bond(rc, ro, BondOrder::Double);
  acid.add_bond(rc, roh, BondOrder::Single);
  append(reactants, acid);
  // alcohol: ester oxygen + fragment b keep their maps
  MolGraph alcohol;
  alcohol.add_atom(product.atoms[ester_o]);
  const int aoff = append(alcohol, b);
  for (std::size_t i = 0; i < b.atoms.size(); ++i)
    alcohol.atoms[aoff + i].atom_map = product.atoms[boff + i].atom_map;
  alcohol.add_bond(0, aoff, BondOrder::Single);
  append(reactants, alcohol);
  return reaction_line(reactants, product);
}

// A-C(=O)-NH-B  =>  A-C(=O)-OH . H2N-B
std::string make_amide(Rng& rng) {
  MolGraph a = random_fragment(rng, 2 + rng.uniform_int(4));
  MolGraph b = random_fragment(rng, 2 + rng.uniform_int(4));
  MolGraph product = a;
  const int carbonyl = product.add_atom(plain("C"));
  const int oxo = product.add_atom(plain("O"));
  const int amide_n = product.add_atom(plain("N"));
  product.add_bond(0, carbonyl, BondOrder::Single);
  product.add_bond(carbonyl, oxo, BondOrder::Double);
  product.add_bond(carbonyl, amide_n, BondOrder::Single);
  const int boff = append(product, b);
  product.add_bond(amide_n, boff, BondOrder::Single);
  number_atoms(product);

  MolGraph reactants;
  MolGraph acid = mapped_copy(a);
  for (std::size_t i = 0; i < acid.atoms.size(); ++i)
    acid.atoms[i].atom_map = product.atoms[i].atom_map;
  const int rc = acid.add_atom(product.atoms[carbonyl]);
  const int ro = acid.add_atom(product.atoms[oxo]);
  const int roh = acid.add_atom(plain("O"));
  acid.add_bond(0, rc, BondOrder::Single);
  acid.add_bond(rc, ro, BondOrder::Double);
  acid.add_bond(rc, roh, BondOrder::Single);
  append(reactants, acid);
  MolGraph amine;
  amine.add_atom(product.atoms[amide_n]);
  const int aoff = append(amine, b);
  for (std::size_t i = 0; i < b.atoms.size(); ++i)
    amine.atoms[aoff + i].atom_map = product.atoms[boff + i].atom_map;
  amine.add_bond(0, aoff, BondOrder::Single);
  append(reactants, amine);
  return reaction_line(reactants, product);
}

// A-NH-B  =>  A-Br . H2N-B  (retro N-alkylation; A attaches via its carbon 0)
std::string make_alkylation(Rng& rng) {
  MolGraph a = random_fragment(rng, 2 + rng.uniform_int(4));
  MolGraph b = random_fragment(rng, 2 + rng.uniform_int(4));
  MolGraph product = a;
  const int n = product.add_atom(plain("N"));
  product.add_bond(0, n, BondOrder::Single);
  const int boff = append(product, b);
  product.add_bond(n, boff, BondOrder::Single);
  number_atoms(product);

  MolGraph reactants;
  MolGraph halide = mapped_copy(a);
  for (std::size_t i = 0; i < halide.atoms.size(); ++i)
    halide.atoms[i].atom_map = product.atoms[i].atom_map;
  const int br = halide.add_atom(plain("Br"));
  halide.add_bond(0, br, BondOrder::Single);
  append(reactants, halide);
  MolGraph amine;
  amine.add_atom(product.atoms[n]);
  const int aoff = append(amine, b);
  for (std::size_t i = 0; i < b.atoms.size(); ++i)
    amine.atoms[aoff + i].atom_map = product.atoms[boff + i].atom_map;
  amine.add_bond(0, aoff, BondOrder::Single);
  append(reactants, amine);
  return reaction_line(reactants, product);
}

}  // namespace

bool forward_consistent(const data::Reaction& r) {
  std::map<int, int> pmap, rmap;  // atom map -> atom index
  for (std::size_t i = 0; i < r.product.atoms.size(); ++i) {
    const int m = r.product.atoms[i].atom_map;
    if (m == 0 || pmap.count(m)) return false;  // products fully, uniquely mapped
    pmap[m] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < r.reactants.atoms.size(); ++i) {
    const int m = r.reactants.atoms[i].atom_map;
    if (m == 0) continue;
    if (rmap.count(m)) return false;
    rmap[m] = static_cast<int>(i);
  }
  if (rmap.size() != pmap.size()) return false;
  for (const auto& [m, pi] : pmap) {
    auto it = rmap.find(m);
    if (it == rmap.end()) return false;
    if (r.reactants.atoms[it->second].element != r.product.atoms[pi].element)
      return false;
  }
  // every mapped-mapped product bond must survive except exactly one broken
  int broken = 0;
  for (const auto& b : r.product.bonds) {
    const int ma = r.product.atoms[b.a].atom_map;
    const int mb = r.product.atoms[b.b].atom_map;
    const int idx = r.reactants.bond_between(rmap.at(ma), rmap.at(mb));
    if (idx < 0) {
      ++broken;
      continue;
    }
    if (r.reactants.bonds[idx].order != b.order) return false;
  }
  if (broken != 1) return false;
  // and no new bonds between mapped reactant atoms
  std::size_t mapped_bonds = 0;
  for (const auto& b : r.reactants.bonds) {
    if (r.reactants.atoms[b.a].atom_map != 0 &&
        r.reactants.atoms[b.b].atom_map != 0)
      ++mapped_bonds;
  }
  return mapped_bonds == r.product.bonds.size() - 1;
}

// Reaction corpora list reagents alongside true precursors for a fraction of
// records; here 2.5% of records carry a trailing methanol. The spectator is
// invisible in the product, so the reactant length is not a function of the
// product: a length head can only learn the majority (no-spectator) answer,
// while a true-length hint reveals whether the spectator is present. This is
// what separates the oracle-length, variant-pad and baseline-length
// inference modes on the synthetic task. It is appended after the mapped
// fragments, so written reactant strings differ from their spectator-free
// form only in a ".CO" suffix.
std::string add_spectator_if_drawn(const std::string& line, Rng& spec_rng) {
  if (spec_rng.uniform() >= 0.025) return line;
  const auto sep = line.find(">>");
  return line.substr(0, sep) + ".CO" + line.substr(sep);
}

std::vector<std::string> generate_reactions(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  // The spectator draw lives on its own stream so that the molecule
  // skeletons are independent of the spectator rate.
  Rng spec_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::string> out;
  out.reserve(n);
  while (out.size() < n) {
    std::string line;
    switch (rng.uniform_int(3)) {
      case 0: line = make_ester(rng); break;
      case 1: line = make_amide(rng); break;
      default: line = make_alkylation(rng); break;
    }
    line = add_spectator_if_drawn(line, spec_rng);
    // generated records must satisfy their own template contract
    if (!forward_consistent(data::parse_reaction(line)))
      throw std::logic_error("synthetic record failed its template check: " + line);
    out.push_back(line);
  }
  return out;
}

void write_reactions(const std::vector<std::string>& lines,
                     const std::string& path) {
  std::ofstream os(path);
  if (!os) throw data::DataError("cannot open " + path + " for writing");
  for (const auto& line : lines) os << line << "\n";
  if (!os) throw data::DataError("write failed for " + path);
}

}  // namespace differ::synth
