//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_SYNTH_HPP
#define DIFFER_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "differ/dataset.hpp"

namespace differ::synth {

// Deterministic synthetic retrosynthesis corpus. Each record is built from
// two random acyclic fragments joined by one of three disconnection
// templates (ester, amide, amine alkylation), so the ground-truth reactants
// are known by construction and every product atom carries a map.
std::vector<std::string> generate_reactions(std::size_t n, std::uint64_t seed);

// structural consistency between a generated product and its reactants:
// identical mapped atoms, identical mapped-mapped bonds except exactly one
// broken bond
bool forward_consistent(const data::Reaction& r);

void write_reactions(const std::vector<std::string>& lines,
                     const std::string& path);

}  // namespace differ::synth

#endif
