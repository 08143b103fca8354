//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_OPS_HPP
#define DIFFER_OPS_HPP

#include <vector>

#include "differ/tensor.hpp"

namespace differ::ops {

// The closed kernel set of the network module. Every op appends a backward
// record to ctx.tape when recording and any input requires gradients.

TensorPtr matmul(Context& ctx, const TensorPtr& a, const TensorPtr& b);
// a @ b^T
TensorPtr matmul_nt(Context& ctx, const TensorPtr& a, const TensorPtr& b);
TensorPtr add(Context& ctx, const TensorPtr& a, const TensorPtr& b);
// broadcast a row vector over every row of a
TensorPtr add_rowvec(Context& ctx, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Context& ctx, const TensorPtr& a, const TensorPtr& b);
// alpha * a + beta, elementwise with scalar constants
TensorPtr affine(Context& ctx, const TensorPtr& a, double alpha, double beta);
TensorPtr gelu(Context& ctx, const TensorPtr& a);
TensorPtr softmax_rows(Context& ctx, const TensorPtr& a);
TensorPtr log(Context& ctx, const TensorPtr& a);
TensorPtr clamp_min(Context& ctx, const TensorPtr& a, double floor);
TensorPtr row_sum(Context& ctx, const TensorPtr& a);   // [m x n] -> [m]
TensorPtr sum(Context& ctx, const TensorPtr& a);       // -> scalar
TensorPtr mean(Context& ctx, const TensorPtr& a);      // -> scalar
TensorPtr layer_norm(Context& ctx, const TensorPtr& a, const TensorPtr& gain,
                     const TensorPtr& bias);
// inverted dropout; identity unless ctx.training
TensorPtr dropout(Context& ctx, const TensorPtr& a, double rate);
// gather rows of table by token id
TensorPtr embed(Context& ctx, const TensorPtr& table,
                const std::vector<int>& ids);
TensorPtr slice_cols(Context& ctx, const TensorPtr& a, std::size_t c0,
                     std::size_t c1);
TensorPtr slice_rows(Context& ctx, const TensorPtr& a, std::size_t r0,
                     std::size_t r1);
TensorPtr concat_cols(Context& ctx, const std::vector<TensorPtr>& parts);
TensorPtr concat_rows(Context& ctx, const std::vector<TensorPtr>& parts);
// mean over rows of -log softmax(logits)[row, target]
TensorPtr cross_entropy_rows(Context& ctx, const TensorPtr& logits,
                             const std::vector<int>& targets);

// exact GELU helpers (erf formulation), shared with the oracle tests
double gelu_value(double x);
double gelu_derivative(double x);

}  // namespace differ::ops

#endif
