//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_SMILES_HPP
#define DIFFER_SMILES_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "differ/rng.hpp"

namespace differ::smiles {

struct LexError : std::runtime_error {
  std::size_t offset;
  LexError(const std::string& msg, std::size_t off)
      : std::runtime_error(msg + " (byte " + std::to_string(off) + ")"),
        offset(off) {}
};

struct ParseError : std::runtime_error {
  std::size_t token_index;
  ParseError(const std::string& msg, std::size_t idx)
      : std::runtime_error(msg + " (token " + std::to_string(idx) + ")"),
        token_index(idx) {}
};

struct AlignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BondOrder { Single, Double, Triple, Aromatic };
enum class BondStereo { None, Up, Down };
enum class Chirality { None, Ccw, Cw };  // @ and @@

struct Atom {
  std::string element;   // capitalized symbol, e.g. "C", "Cl"
  bool aromatic = false;
  int formal_charge = 0;
  int explicit_h = -1;   // -1: not specified (organic-subset implicit rule)
  int isotope = 0;       // 0: none
  int atom_map = 0;      // 0: none
  Chirality chirality = Chirality::None;
  bool bracket = false;  // was written in brackets
};

struct Bond {
  int a = -1, b = -1;
  BondOrder order = BondOrder::Single;
  BondStereo stereo = BondStereo::None;
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int add_atom(Atom a);
  // enforces valid endpoints, no self bonds, no duplicates
  void add_bond(int a, int b, BondOrder order,
                BondStereo stereo = BondStereo::None);
  // (neighbor atom index, bond index) pairs in bond insertion order
  std::vector<std::pair<int, int>> neighbors(int atom) const;
  int bond_between(int a, int b) const;  // -1 when absent
  // connected components as atom index lists, discovery order
  std::vector<std::vector<int>> components() const;
  bool empty() const { return atoms.empty(); }
};

struct Token {
  std::string text;
  std::size_t offset;
};

// Lexes into surface tokens; concatenating token texts reproduces the input.
std::vector<Token> lex(const std::string& text);

MolGraph parse_tokens(const std::vector<Token>& tokens);
MolGraph parse(const std::string& text);

struct WriteOptions {
  bool include_maps = true;
  // neighbor visit order: by ascending atom index, ascending atom map, or an
  // explicit per-call shuffle
  enum class Order { ByIndex, ByMap, Shuffled } order = Order::ByIndex;
  Rng* rng = nullptr;  // required for Shuffled
};

// Depth-first SMILES of the component containing `root`, starting at `root`.
std::string write_component(const MolGraph& g, int root,
                            const WriteOptions& opts = {});
// All components; the one containing `root` first, others by ascending
// smallest atom index.
std::string write(const MolGraph& g, int root, const WriteOptions& opts = {});

// Uniform random root and shuffled branch order, deterministic given rng
// state.
std::string random_rooted(const MolGraph& g, Rng& rng);

// Product rooted at product_root; the reactant component holding the same
// atom map comes first, rooted at the matching atom. Maps are stripped from
// both outputs.
std::pair<std::string, std::string> root_align(const MolGraph& product,
                                               const MolGraph& reactants,
                                               int product_root);

// Canonical string: depends only on the isomorphism class (element, charge,
// isotope, aromaticity, H count, chirality marker, bond order/stereo as
// colors). Components sorted by their canonical strings. Atom maps ignored.
std::string canonical(const MolGraph& g);
std::string canonical(const std::string& smiles_text);

MolGraph strip_atom_maps(MolGraph g);

// Clears atom maps and drops bracket bookkeeping the organic-subset implicit
// rule would reproduce, so [CH3]O and CO print and compare identically.
MolGraph normalize(MolGraph g);

// Implicit hydrogen count under the standard organic-subset valence table;
// bracket atoms use their explicit count (default 0).
int hydrogen_count(const MolGraph& g, int atom);

bool element_supported(const std::string& symbol);

}  // namespace differ::smiles

#endif
