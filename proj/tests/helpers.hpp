//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Test-only oracles, independent of the implementation paths they check.

#ifndef DIFFER_TESTS_HELPERS_HPP
#define DIFFER_TESTS_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "differ/smiles.hpp"
#include "differ/tensor.hpp"

namespace testutil {

// Central finite differences against the tape gradient. `loss_fn` must
// rebuild the whole graph from current parameter values on every call.
// Returns the max relative error over all parameter entries.
inline double gradient_check(
    std::vector<differ::TensorPtr> params,
    const std::function<differ::TensorPtr(differ::Context&)>& loss_fn,
    double eps = 1e-5) {
  using namespace differ;
  Tape tape;
  Context ctx{&tape, false, nullptr};
  for (auto& p : params) p->zero_grad();
  TensorPtr loss = loss_fn(ctx);
  tape.backward(loss);
  double worst = 0.0;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->data[i];
      Context eval{nullptr, false, nullptr};
      p->data[i] = saved + eps;
      const double up = loss_fn(eval)->data[0];
      p->data[i] = saved - eps;
      const double dn = loss_fn(eval)->data[0];
      p->data[i] = saved;
      const double fd = (up - dn) / (2.0 * eps);
      const double an = p->grad.empty() ? 0.0 : p->grad[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

// VF2-style backtracking isomorphism between molecular graphs, matching
// element, aromaticity, charge, isotope, chirality marker, hydrogen count
// and bond orders.
inline bool isomorphic(const differ::smiles::MolGraph& g1,
                       const differ::smiles::MolGraph& g2) {
  using differ::smiles::hydrogen_count;
  const std::size_t n = g1.atoms.size();
  if (n != g2.atoms.size() || g1.bonds.size() != g2.bonds.size()) return false;
  auto atom_eq = [&](int a, int b) {
    const auto& x = g1.atoms[a];
    const auto& y = g2.atoms[b];
    return x.element == y.element && x.aromatic == y.aromatic &&
           x.formal_charge == y.formal_charge && x.isotope == y.isotope &&
           x.chirality == y.chirality &&
           hydrogen_count(g1, a) == hydrogen_count(g2, b);
  };
  std::vector<int> map(n, -1), used(n, 0);
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == n) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || !atom_eq(static_cast<int>(i), static_cast<int>(j)))
        continue;
      bool ok = true;
      for (std::size_t a = 0; a < i && ok; ++a) {
        const int b1 = g1.bond_between(static_cast<int>(i), static_cast<int>(a));
        const int b2 = g2.bond_between(static_cast<int>(j), map[a]);
        if ((b1 >= 0) != (b2 >= 0))
          ok = false;
        else if (b1 >= 0 && g1.bonds[b1].order != g2.bonds[b2].order)
          ok = false;
      }
      if (!ok) continue;
      map[i] = static_cast<int>(j);
      used[j] = 1;
      if (go(i + 1)) return true;
      used[j] = 0;
      map[i] = -1;
    }
    return false;
  };
  return go(0);
}

// random vertex relabeling, preserving all attributes
inline differ::smiles::MolGraph permute(const differ::smiles::MolGraph& g,
                                        const std::vector<int>& perm) {
  differ::smiles::MolGraph out;
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < perm.size(); ++i) out.add_atom(g.atoms[inv[i]]);
  for (const auto& b : g.bonds)
    out.add_bond(perm[b.a], perm[b.b], b.order, b.stereo);
  return out;
}

}  // namespace testutil

#endif
