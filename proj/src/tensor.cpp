//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/tensor.hpp"

#include <numeric>

namespace differ {

Tensor::Tensor(std::vector<std::size_t> s, bool rg)
    : shape(std::move(s)), requires_grad(rg) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  data.assign(n, 0.0);
  if (requires_grad) grad.assign(n, 0.0);
}

void Tensor::zero_grad() {
  if (requires_grad) grad.assign(data.size(), 0.0);
}

void Tensor::accumulate_grad(const double* g, std::size_t n) {
  if (!requires_grad) return;
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) grad[i] += g[i];
}

TensorPtr make_tensor(std::vector<std::size_t> shape, bool requires_grad) {
  return std::make_shared<Tensor>(std::move(shape), requires_grad);
}

TensorPtr make_scalar(double v, bool requires_grad) {
  auto t = make_tensor({1}, requires_grad);
  t->data[0] = v;
  return t;
}

TensorPtr make_const(std::vector<std::size_t> shape, std::vector<double> values) {
  auto t = make_tensor(std::move(shape), false);
  if (t->data.size() != values.size())
    throw DimensionError("make_const: value count does not match shape");
  t->data = std::move(values);
  return t;
}

void Tape::backward(const TensorPtr& loss) {
  if (!loss->is_scalar())
    throw ContractError("backward: loss must be a scalar tensor");
  if (!loss->requires_grad)
    throw ContractError("backward: loss does not require gradients");
  loss->grad.assign(1, 1.0);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

}  // namespace differ
