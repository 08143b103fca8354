//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/adam.hpp"

#include <cmath>

namespace differ {

TensorPtr ParamRegistry::find(const std::string& name) const {
  for (const auto& [n, p] : params)
    if (n == name) return p;
  return nullptr;
}

void Adam::step(ParamRegistry& reg) {
  if (m_.empty()) {
    m_.resize(reg.params.size());
    v_.resize(reg.params.size());
    for (std::size_t i = 0; i < reg.params.size(); ++i) {
      m_[i].assign(reg.params[i].second->size(), 0.0);
      v_[i].assign(reg.params[i].second->size(), 0.0);
    }
  }
  if (m_.size() != reg.params.size())
    throw ContractError("adam: registry size changed between steps");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < reg.params.size(); ++i) {
    auto& [name, p] = reg.params[i];
    if (!p->requires_grad || p->grad.empty()) continue;
    for (std::size_t j = 0; j < p->size(); ++j) {
      const double g = p->grad[j];
      if (!std::isfinite(g))
        throw NumericError("adam: non-finite gradient in parameter " + name);
      m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
      v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      p->data[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace differ
