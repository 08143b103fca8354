//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_TENSOR_HPP
#define DIFFER_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "differ/rng.hpp"

namespace differ {

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major dense array of 64-bit floats. Rank is 1 or 2 in practice; a
// scalar is shape {1}.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;  // same size as data when requires_grad

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, bool rg = false);

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  bool is_scalar() const { return data.size() == 1; }

  void zero_grad();
  void accumulate_grad(const double* g, std::size_t n);
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(std::vector<std::size_t> shape, bool requires_grad = false);
TensorPtr make_scalar(double v, bool requires_grad = false);
TensorPtr make_const(std::vector<std::size_t> shape, std::vector<double> values);

// Reverse-mode tape: records are appended in execution order, so replaying
// them backwards is a valid topological traversal.
class Tape {
 public:
  void push(std::function<void()> backward_fn) {
    records_.push_back(std::move(backward_fn));
  }
  // Seeds grad(loss) = 1 and replays every record once, newest first.
  void backward(const TensorPtr& loss);
  void clear() { records_.clear(); }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<std::function<void()>> records_;
};

// Execution context threaded through the ops: tape == nullptr means pure
// inference (nothing recorded), training == false makes dropout an identity.
struct Context {
  Tape* tape = nullptr;
  bool training = false;
  Rng* rng = nullptr;

  bool recording() const { return tape != nullptr; }
};

}  // namespace differ

#endif
