//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_DATASET_HPP
#define DIFFER_DATASET_HPP

#include <map>
#include <string>
#include <vector>

#include "differ/smiles.hpp"

namespace differ::data {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Surface-token vocabulary with three reserved ids: pad, the encoder's
// length-query token, and unknown.
struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kQuery = 1;
  static constexpr int kUnk = 2;

  std::vector<std::string> tokens;
  std::map<std::string, int> index;

  // reserved ids + sorted unique surface tokens of the corpus + a structural
  // alphabet (parens, bonds, ring digits) that augmentation may introduce
  static Vocab build(const std::vector<std::string>& corpus);
  // exact token list, e.g. from a checkpoint
  static Vocab from_tokens(std::vector<std::string> toks);

  std::size_t size() const { return tokens.size(); }
  int id(const std::string& tok) const;  // kUnk when absent
  std::vector<int> encode(const std::string& smiles_text) const;
  // concatenates token texts, skipping reserved ids
  std::string decode(const std::vector<int>& ids) const;
};

// One retrosynthesis record: atom-mapped reactants and product.
struct Reaction {
  smiles::MolGraph reactants;
  smiles::MolGraph product;
  std::string raw;
};

// Text file of "reactants>>product" lines ("reactants>reagents>product" is
// accepted with the reagents ignored); '#' comments and blank lines are
// skipped. Malformed lines are collected into `errors` (1-based line
// numbers); more than 10% malformed raises DataError.
std::vector<Reaction> load_reactions(const std::string& path,
                                     std::vector<std::string>* errors = nullptr);
Reaction parse_reaction(const std::string& line);

}  // namespace differ::data

#endif
