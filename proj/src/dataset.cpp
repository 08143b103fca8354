//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace differ::data {

namespace {

const char* kReserved[] = {"<pad>", "<len>", "<unk>"};

}  // namespace

Vocab Vocab::build(const std::vector<std::string>& corpus) {
  std::set<std::string> seen;
  for (const auto& s : corpus)
    for (const auto& tok : smiles::lex(s)) seen.insert(tok.text);
  for (const char* s : {"(", ")", "=", "#", "-", ".", "/", "\\"}) seen.insert(s);
  for (char d = '1'; d <= '9'; ++d) seen.insert(std::string(1, d));
  std::vector<std::string> toks(std::begin(kReserved), std::end(kReserved));
  toks.insert(toks.end(), seen.begin(), seen.end());
  return from_tokens(std::move(toks));
}

Vocab Vocab::from_tokens(std::vector<std::string> toks) {
  if (toks.size() < 3)
    throw DataError("vocab: needs at least the three reserved tokens");
  Vocab v;
  v.tokens = std::move(toks);
  for (std::size_t i = 0; i < v.tokens.size(); ++i) {
    if (!v.index.emplace(v.tokens[i], static_cast<int>(i)).second)
      throw DataError("vocab: duplicate token " + v.tokens[i]);
  }
  return v;
}

int Vocab::id(const std::string& tok) const {
  auto it = index.find(tok);
  return it == index.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const std::string& smiles_text) const {
  std::vector<int> out;
  for (const auto& tok : smiles::lex(smiles_text)) out.push_back(id(tok.text));
  return out;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int i : ids) {
    if (i < 0 || static_cast<std::size_t>(i) >= tokens.size())
      throw DataError("vocab: id out of range");
    if (i == kPad || i == kQuery || i == kUnk) continue;
    out += tokens[i];
  }
  return out;
}

Reaction parse_reaction(const std::string& line) {
  // "reactants>>product" or "reactants>reagents>product" (reagents dropped)
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '>') {
      parts.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() != 3)
    throw DataError("reaction: expected reactants>[reagents]>product");
  if (parts[0].empty() || parts[2].empty())
    throw DataError("reaction: empty reactants or product");
  Reaction r;
  r.raw = line;
  r.reactants = smiles::parse(parts[0]);
  r.product = smiles::parse(parts[2]);
  return r;
}

std::vector<Reaction> load_reactions(const std::string& path,
                                     std::vector<std::string>* errors) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open reaction file " + path);
  std::vector<Reaction> out;
  std::vector<std::string> local_errors;
  std::string line;
  std::size_t lineno = 0, attempted = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ++attempted;
    try {
      out.push_back(parse_reaction(line));
    } catch (const std::exception& e) {
      local_errors.push_back(path + ":" + std::to_string(lineno) + ": " +
                             e.what());
    }
  }
  if (attempted > 0 && local_errors.size() * 10 > attempted) {
    std::string msg = "more than 10% malformed lines in " + path;
    for (const auto& e : local_errors) msg += "\n  " + e;
    throw DataError(msg);
  }
  if (errors != nullptr) *errors = std::move(local_errors);
  return out;
}

}  // namespace differ::data
