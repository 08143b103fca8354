//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/ops.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "differ/kernels.hpp"

namespace differ::ops {

namespace {

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i)
    os << (i ? "x" : "") << t.shape[i];
  os << "]";
  return os.str();
}

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) +
                       " vs " + shape_str(b));
}

void ensure_finite(const TensorPtr& t, const char* op) {
  for (double v : t->data)
    if (!std::isfinite(v))
      throw NumericError(std::string(op) + ": non-finite value in output");
}

bool wants_grad(const Context& ctx, std::initializer_list<TensorPtr> ins) {
  if (!ctx.recording()) return false;
  for (const auto& t : ins)
    if (t->requires_grad) return true;
  return false;
}

TensorPtr out_like(std::vector<std::size_t> shape, bool rg) {
  return make_tensor(std::move(shape), rg);
}

// grad of `out` viewed as zeros when nothing downstream touched it
const double* grad_or_null(const TensorPtr& t) {
  return t->grad.empty() ? nullptr : t->grad.data();
}

}  // namespace

double gelu_value(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

double gelu_derivative(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  const double Phi = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  return Phi + x * phi;
}

TensorPtr matmul(Context& ctx, const TensorPtr& a, const TensorPtr& b) {
  if (a->cols() != b->rows()) shape_error("matmul", *a, *b);
  const std::size_t m = a->rows(), k = a->cols(), n = b->cols();
  bool rg = wants_grad(ctx, {a, b});
  auto out = out_like({m, n}, rg);
  kernels::backend().gemm_nn(a->data.data(), b->data.data(), out->data.data(),
                             m, k, n, false);
  ensure_finite(out, "matmul");
  if (rg) {
    ctx.tape->push([a, b, out, m, k, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->requires_grad) {
        if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
        // dA = dC @ B^T
        kernels::backend().gemm_nt(g, b->data.data(), a->grad.data(), m, n, k,
                                   true);
      }
      if (b->requires_grad) {
        if (b->grad.empty()) b->grad.assign(b->size(), 0.0);
        // dB = A^T @ dC
        kernels::backend().gemm_tn(a->data.data(), g, b->grad.data(), m, k, n,
                                   true);
      }
    });
  }
  return out;
}

TensorPtr matmul_nt(Context& ctx, const TensorPtr& a, const TensorPtr& b) {
  if (a->cols() != b->cols()) shape_error("matmul_nt", *a, *b);
  const std::size_t m = a->rows(), k = a->cols(), n = b->rows();
  bool rg = wants_grad(ctx, {a, b});
  auto out = out_like({m, n}, rg);
  kernels::backend().gemm_nt(a->data.data(), b->data.data(), out->data.data(),
                             m, k, n, false);
  ensure_finite(out, "matmul_nt");
  if (rg) {
    ctx.tape->push([a, b, out, m, k, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->requires_grad) {
        if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
        // dA = dC @ B
        kernels::backend().gemm_nn(g, b->data.data(), a->grad.data(), m, n, k,
                                   true);
      }
      if (b->requires_grad) {
        if (b->grad.empty()) b->grad.assign(b->size(), 0.0);
        // dB = dC^T @ A
        kernels::backend().gemm_tn(g, a->data.data(), b->grad.data(), m, n, k,
                                   true);
      }
    });
  }
  return out;
}

TensorPtr add(Context& ctx, const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) shape_error("add", *a, *b);
  bool rg = wants_grad(ctx, {a, b});
  auto out = out_like(a->shape, rg);
  kernels::backend().add(a->data.data(), b->data.data(), out->data.data(),
                         a->size());
  ensure_finite(out, "add");
  if (rg) {
    ctx.tape->push([a, b, out]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      a->accumulate_grad(g, out->size());
      b->accumulate_grad(g, out->size());
    });
  }
  return out;
}

TensorPtr add_rowvec(Context& ctx, const TensorPtr& a, const TensorPtr& b) {
  const std::size_t m = a->rows(), n = a->cols();
  if (b->size() != n) shape_error("add_rowvec", *a, *b);
  bool rg = wants_grad(ctx, {a, b});
  auto out = out_like(a->shape, rg);
  for (std::size_t i = 0; i < m; ++i)
    kernels::backend().add(a->data.data() + i * n, b->data.data(),
                           out->data.data() + i * n, n);
  ensure_finite(out, "add_rowvec");
  if (rg) {
    ctx.tape->push([a, b, out, m, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      a->accumulate_grad(g, out->size());
      if (b->requires_grad) {
        if (b->grad.empty()) b->grad.assign(b->size(), 0.0);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) b->grad[j] += g[i * n + j];
      }
    });
  }
  return out;
}

TensorPtr mul(Context& ctx, const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) shape_error("mul", *a, *b);
  bool rg = wants_grad(ctx, {a, b});
  auto out = out_like(a->shape, rg);
  kernels::backend().mul(a->data.data(), b->data.data(), out->data.data(),
                         a->size());
  ensure_finite(out, "mul");
  if (rg) {
    ctx.tape->push([a, b, out]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      const std::size_t n = out->size();
      if (a->requires_grad) {
        if (a->grad.empty()) a->grad.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) a->grad[i] += g[i] * b->data[i];
      }
      if (b->requires_grad) {
        if (b->grad.empty()) b->grad.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) b->grad[i] += g[i] * a->data[i];
      }
    });
  }
  return out;
}

TensorPtr affine(Context& ctx, const TensorPtr& a, double alpha, double beta) {
  bool rg = wants_grad(ctx, {a});
  auto out = out_like(a->shape, rg);
  kernels::backend().axpby(a->data.data(), alpha, beta, out->data.data(),
                           a->size());
  ensure_finite(out, "affine");
  if (rg) {
    ctx.tape->push([a, out, alpha]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < a->size(); ++i) a->grad[i] += alpha * g[i];
    });
  }
  return out;
}

TensorPtr gelu(Context& ctx, const TensorPtr& a) {
  bool rg = wants_grad(ctx, {a});
  auto out = out_like(a->shape, rg);
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data[i] = gelu_value(a->data[i]);
  ensure_finite(out, "gelu");
  if (rg) {
    ctx.tape->push([a, out]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < a->size(); ++i)
        a->grad[i] += g[i] * gelu_derivative(a->data[i]);
    });
  }
  return out;
}

TensorPtr softmax_rows(Context& ctx, const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  bool rg = wants_grad(ctx, {a});
  auto out = out_like(a->shape, rg);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = a->data.data() + i * n;
    double* y = out->data.data() + i * n;
    double mx = x[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < n; ++j) y[j] /= z;
  }
  ensure_finite(out, "softmax");
  if (rg) {
    ctx.tape->push([a, out, m, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double* p = out->data.data() + i * n;
        const double* gr = g + i * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += gr[j] * p[j];
        for (std::size_t j = 0; j < n; ++j)
          a->grad[i * n + j] += p[j] * (gr[j] - dot);
      }
    });
  }
  return out;
}

TensorPtr log(Context& ctx, const TensorPtr& a) {
  bool rg = wants_grad(ctx, {a});
  auto out = out_like(a->shape, rg);
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data[i] = std::log(a->data[i]);
  ensure_finite(out, "log");
  if (rg) {
    ctx.tape->push([a, out]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < a->size(); ++i)
        a->grad[i] += g[i] / a->data[i];
    });
  }
  return out;
}

TensorPtr clamp_min(Context& ctx, const TensorPtr& a, double floor) {
  bool rg = wants_grad(ctx, {a});
  auto out = out_like(a->shape, rg);
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data[i] = std::max(a->data[i], floor);
  if (rg) {
    ctx.tape->push([a, out, floor]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < a->size(); ++i)
        if (a->data[i] > floor) a->grad[i] += g[i];
    });
  }
  return out;
}

TensorPtr row_sum(Context& ctx, const TensorPtr& a) {
  const std::size_t m = a->rows(), n = a->cols();
  bool rg = wants_grad(ctx, {a});
  auto out = out_like({m}, rg);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a->data[i * n + j];
    out->data[i] = s;
  }
  ensure_finite(out, "row_sum");
  if (rg) {
    ctx.tape->push([a, out, m, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a->grad[i * n + j] += g[i];
    });
  }
  return out;
}

TensorPtr sum(Context& ctx, const TensorPtr& a) {
  bool rg = wants_grad(ctx, {a});
  auto out = out_like({1}, rg);
  double s = 0.0;
  for (double v : a->data) s += v;
  out->data[0] = s;
  ensure_finite(out, "sum");
  if (rg) {
    ctx.tape->push([a, out]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < a->size(); ++i) a->grad[i] += g[0];
    });
  }
  return out;
}

TensorPtr mean(Context& ctx, const TensorPtr& a) {
  auto s = sum(ctx, a);
  return affine(ctx, s, 1.0 / static_cast<double>(a->size()), 0.0);
}

TensorPtr layer_norm(Context& ctx, const TensorPtr& a, const TensorPtr& gain,
                     const TensorPtr& bias) {
  const std::size_t m = a->rows(), n = a->cols();
  if (gain->size() != n) shape_error("layer_norm", *a, *gain);
  if (bias->size() != n) shape_error("layer_norm", *a, *bias);
  constexpr double kEps = 1e-5;
  bool rg = wants_grad(ctx, {a, gain, bias});
  auto out = out_like(a->shape, rg);
  auto xhat = std::make_shared<std::vector<double>>(m * n);
  auto inv_sigma = std::make_shared<std::vector<double>>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = a->data.data() + i * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x[j] - mu) * (x[j] - mu);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + kEps);
    (*inv_sigma)[i] = is;
    for (std::size_t j = 0; j < n; ++j) {
      const double xh = (x[j] - mu) * is;
      (*xhat)[i * n + j] = xh;
      out->data[i * n + j] = gain->data[j] * xh + bias->data[j];
    }
  }
  ensure_finite(out, "layer_norm");
  if (rg) {
    ctx.tape->push([a, gain, bias, out, xhat, inv_sigma, m, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      const double dn = static_cast<double>(n);
      if (a->requires_grad && a->grad.empty()) a->grad.assign(a->size(), 0.0);
      if (gain->requires_grad && gain->grad.empty())
        gain->grad.assign(n, 0.0);
      if (bias->requires_grad && bias->grad.empty())
        bias->grad.assign(n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double* gr = g + i * n;
        const double* xh = xhat->data() + i * n;
        double sum_gy = 0.0, sum_gyx = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double gy = gr[j] * gain->data[j];
          sum_gy += gy;
          sum_gyx += gy * xh[j];
        }
        if (a->requires_grad) {
          const double is = (*inv_sigma)[i];
          for (std::size_t j = 0; j < n; ++j) {
            const double gy = gr[j] * gain->data[j];
            a->grad[i * n + j] +=
                is * (gy - sum_gy / dn - xh[j] * sum_gyx / dn);
          }
        }
        if (gain->requires_grad)
          for (std::size_t j = 0; j < n; ++j)
            gain->grad[j] += gr[j] * xh[j];
        if (bias->requires_grad)
          for (std::size_t j = 0; j < n; ++j) bias->grad[j] += gr[j];
      }
    });
  }
  return out;
}

TensorPtr dropout(Context& ctx, const TensorPtr& a, double rate) {
  if (!ctx.training || rate <= 0.0) return a;
  if (!ctx.rng) throw ContractError("dropout: training context has no rng");
  bool rg = wants_grad(ctx, {a});
  auto out = out_like(a->shape, rg);
  auto mask = std::make_shared<std::vector<double>>(a->size());
  const double keep = 1.0 - rate;
  for (std::size_t i = 0; i < a->size(); ++i) {
    const double m = ctx.rng->uniform() < rate ? 0.0 : 1.0 / keep;
    (*mask)[i] = m;
    out->data[i] = a->data[i] * m;
  }
  if (rg) {
    ctx.tape->push([a, out, mask]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < a->size(); ++i)
        a->grad[i] += g[i] * (*mask)[i];
    });
  }
  return out;
}

TensorPtr embed(Context& ctx, const TensorPtr& table,
                const std::vector<int>& ids) {
  const std::size_t K = table->rows(), d = table->cols();
  for (int id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= K)
      throw ContractError("embed: token id out of vocabulary bounds");
  bool rg = wants_grad(ctx, {table});
  auto out = out_like({ids.size(), d}, rg);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::memcpy(out->data.data() + i * d, table->data.data() + ids[i] * d,
                d * sizeof(double));
  if (rg) {
    ctx.tape->push([table, out, ids, d]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (table->grad.empty()) table->grad.assign(table->size(), 0.0);
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
          table->grad[ids[i] * d + j] += g[i * d + j];
    });
  }
  return out;
}

TensorPtr slice_cols(Context& ctx, const TensorPtr& a, std::size_t c0,
                     std::size_t c1) {
  const std::size_t m = a->rows(), n = a->cols();
  if (c0 >= c1 || c1 > n) throw ContractError("slice_cols: bad column range");
  const std::size_t w = c1 - c0;
  bool rg = wants_grad(ctx, {a});
  auto out = out_like({m, w}, rg);
  for (std::size_t i = 0; i < m; ++i)
    std::memcpy(out->data.data() + i * w, a->data.data() + i * n + c0,
                w * sizeof(double));
  if (rg) {
    ctx.tape->push([a, out, m, n, c0, w]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j)
          a->grad[i * n + c0 + j] += g[i * w + j];
    });
  }
  return out;
}

TensorPtr slice_rows(Context& ctx, const TensorPtr& a, std::size_t r0,
                     std::size_t r1) {
  const std::size_t m = a->rows(), n = a->cols();
  if (r0 >= r1 || r1 > m) throw ContractError("slice_rows: bad row range");
  const std::size_t h = r1 - r0;
  bool rg = wants_grad(ctx, {a});
  auto out = out_like({h, n}, rg);
  std::memcpy(out->data.data(), a->data.data() + r0 * n,
              h * n * sizeof(double));
  if (rg) {
    ctx.tape->push([a, out, n, r0, h]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (a->grad.empty()) a->grad.assign(a->size(), 0.0);
      for (std::size_t i = 0; i < h * n; ++i) a->grad[r0 * n + i] += g[i];
    });
  }
  return out;
}

TensorPtr concat_cols(Context& ctx, const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t m = parts[0]->rows();
  std::size_t n = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p->rows() != m) shape_error("concat_cols", *parts[0], *p);
    n += p->cols();
    rg = rg || (ctx.recording() && p->requires_grad);
  }
  auto out = out_like({m, n}, rg);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t w = p->cols();
    for (std::size_t i = 0; i < m; ++i)
      std::memcpy(out->data.data() + i * n + off, p->data.data() + i * w,
                  w * sizeof(double));
    off += w;
  }
  if (rg) {
    ctx.tape->push([parts, out, m, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      std::size_t off = 0;
      for (const auto& p : parts) {
        const std::size_t w = p->cols();
        if (p->requires_grad) {
          if (p->grad.empty()) p->grad.assign(p->size(), 0.0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < w; ++j)
              p->grad[i * w + j] += g[i * n + off + j];
        }
        off += w;
      }
    });
  }
  return out;
}

TensorPtr concat_rows(Context& ctx, const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const std::size_t n = parts[0]->cols();
  std::size_t m = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p->cols() != n) shape_error("concat_rows", *parts[0], *p);
    m += p->rows();
    rg = rg || (ctx.recording() && p->requires_grad);
  }
  auto out = out_like({m, n}, rg);
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::memcpy(out->data.data() + off, p->data.data(),
                p->size() * sizeof(double));
    off += p->size();
  }
  if (rg) {
    ctx.tape->push([parts, out]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      std::size_t off = 0;
      for (const auto& p : parts) {
        if (p->requires_grad) {
          if (p->grad.empty()) p->grad.assign(p->size(), 0.0);
          for (std::size_t i = 0; i < p->size(); ++i)
            p->grad[i] += g[off + i];
        }
        off += p->size();
      }
    });
  }
  return out;
}

TensorPtr cross_entropy_rows(Context& ctx, const TensorPtr& logits,
                             const std::vector<int>& targets) {
  const std::size_t m = logits->rows(), n = logits->cols();
  if (targets.size() != m)
    throw ContractError("cross_entropy: one target per row required");
  for (int t : targets)
    if (t < 0 || static_cast<std::size_t>(t) >= n)
      throw ContractError("cross_entropy: target class out of range");
  bool rg = wants_grad(ctx, {logits});
  auto probs = std::make_shared<std::vector<double>>(m * n);
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = logits->data.data() + i * n;
    double* p = probs->data() + i * n;
    double mx = x[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(x[j] - mx);
    const double logz = std::log(z) + mx;
    for (std::size_t j = 0; j < n; ++j) p[j] = std::exp(x[j] - logz);
    loss -= x[targets[i]] - logz;
  }
  auto out = make_scalar(loss / static_cast<double>(m), rg);
  ensure_finite(out, "cross_entropy");
  if (rg) {
    ctx.tape->push([logits, out, probs, targets, m, n]() {
      const double* g = grad_or_null(out);
      if (!g) return;
      if (logits->grad.empty()) logits->grad.assign(logits->size(), 0.0);
      const double scale = g[0] / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double d = (*probs)[i * n + j];
          if (j == static_cast<std::size_t>(targets[i])) d -= 1.0;
          logits->grad[i * n + j] += scale * d;
        }
    });
  }
  return out;
}

}  // namespace differ::ops
