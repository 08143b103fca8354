//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_ADAM_HPP
#define DIFFER_ADAM_HPP

#include <string>
#include <vector>

#include "differ/tensor.hpp"

namespace differ {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named parameter list shared by the optimizer and the checkpoint writer.
struct ParamRegistry {
  std::vector<std::pair<std::string, TensorPtr>> params;

  TensorPtr add(const std::string& name, TensorPtr t) {
    params.emplace_back(name, t);
    return params.back().second;
  }
  void zero_grad() {
    for (auto& [name, p] : params) p->zero_grad();
  }
  TensorPtr find(const std::string& name) const;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Standard bias-corrected update. Throws NumericError naming the parameter
  // if its gradient is non-finite; params with empty grads are skipped.
  void step(ParamRegistry& reg);

  std::size_t step_count() const { return step_; }
  double lr() const { return cfg_.lr; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  AdamConfig cfg_;
  std::size_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace differ

#endif
