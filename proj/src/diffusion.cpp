//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace differ::diffusion {

NoiseSchedule cosine_schedule(int T) {
  if (T < 1) throw ContractError("cosine_schedule: T must be >= 1");
  constexpr double s = 0.008;
  auto f = [&](double t) {
    const double x = (t / T + s) / (1.0 + s) * M_PI / 2.0;
    const double c = std::cos(x);
    return c * c;
  };
  NoiseSchedule sched;
  sched.T = T;
  sched.beta.assign(T + 1, 0.0);
  sched.alpha.assign(T + 1, 0.0);
  sched.alpha_bar.assign(T + 1, 0.0);
  sched.alpha_bar[0] = 1.0;
  const double f0 = f(0.0);
  for (int t = 1; t <= T; ++t) {
    const double ab = f(static_cast<double>(t)) / f0;
    double beta = 1.0 - ab / sched.alpha_bar[t - 1];
    beta = std::min(beta, 0.999);
    sched.beta[t] = beta;
    sched.alpha[t] = 1.0 - beta;
    sched.alpha_bar[t] = sched.alpha_bar[t - 1] * sched.alpha[t];
  }
  return sched;
}

CategoricalSeq CategoricalSeq::from_tokens(const std::vector<int>& tokens,
                                           std::size_t K) {
  CategoricalSeq seq;
  seq.K = K;
  seq.len = tokens.size();
  seq.one_hot = true;
  seq.probs.assign(seq.len * K, 0.0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || static_cast<std::size_t>(tokens[i]) >= K)
      throw ContractError("CategoricalSeq: token out of range");
    seq.probs[i * K + tokens[i]] = 1.0;
  }
  return seq;
}

CategoricalSeq CategoricalSeq::uniform(std::size_t len, std::size_t K) {
  CategoricalSeq seq;
  seq.K = K;
  seq.len = len;
  seq.one_hot = false;
  seq.probs.assign(len * K, 1.0 / static_cast<double>(K));
  return seq;
}

std::vector<int> CategoricalSeq::argmax_tokens() const {
  std::vector<int> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double* row = probs.data() + i * K;
    out[i] = static_cast<int>(std::max_element(row, row + K) - row);
  }
  return out;
}

void CategoricalSeq::validate(double tol) const {
  if (probs.size() != len * K)
    throw ContractError("CategoricalSeq: storage does not match shape");
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    int ones = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const double p = at(i, k);
      if (p < 0.0 || p > 1.0 + tol)
        throw ContractError("CategoricalSeq: probability outside [0,1]");
      sum += p;
      if (one_hot) {
        if (p != 0.0 && p != 1.0)
          throw ContractError("CategoricalSeq: one-hot entry not 0/1");
        ones += p == 1.0;
      }
    }
    if (std::abs(sum - 1.0) > tol)
      throw ContractError("CategoricalSeq: position does not sum to 1");
    if (one_hot && ones != 1)
      throw ContractError("CategoricalSeq: one-hot row without exactly one 1");
  }
}

namespace {

void check_t(int t, const NoiseSchedule& sched, const char* op) {
  if (t < 1 || t > sched.T)
    throw ContractError(std::string(op) + ": timestep out of range");
}

CategoricalSeq mix_to_uniform(const CategoricalSeq& y, double keep) {
  CategoricalSeq out = y;
  out.one_hot = false;
  const double base = (1.0 - keep) / static_cast<double>(y.K);
  for (double& p : out.probs) p = keep * p + base;
  return out;
}

}  // namespace

CategoricalSeq q_step(const CategoricalSeq& y_prev, int t,
                      const NoiseSchedule& sched) {
  check_t(t, sched, "q_step");
  return mix_to_uniform(y_prev, 1.0 - sched.beta[t]);
}

CategoricalSeq q_from_start(const CategoricalSeq& y0, int t,
                            const NoiseSchedule& sched) {
  check_t(t, sched, "q_from_start");
  return mix_to_uniform(y0, sched.alpha_bar[t]);
}

CategoricalSeq sample_categorical(const CategoricalSeq& dist, Rng& rng) {
  CategoricalSeq out;
  out.K = dist.K;
  out.len = dist.len;
  out.one_hot = true;
  out.probs.assign(dist.len * dist.K, 0.0);
  for (std::size_t i = 0; i < dist.len; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < dist.K; ++k) {
      const double p = dist.at(i, k);
      if (p < 0.0)
        throw ContractError("sample_categorical: negative probability");
      sum += p;
    }
    if (sum <= 0.0)
      throw ContractError("sample_categorical: zero-sum position");
    std::size_t best = 0;
    double best_score = -1e300;
    for (std::size_t k = 0; k < dist.K; ++k) {
      const double p = dist.at(i, k);
      if (p <= 0.0) continue;  // log(0) category can never win
      const double score = std::log(p) + rng.gumbel();
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    out.at(i, best) = 1.0;
  }
  return out;
}

CategoricalSeq posterior(const CategoricalSeq& y_t,
                         const CategoricalSeq& y0_hat, int t,
                         const NoiseSchedule& sched) {
  check_t(t, sched, "posterior");
  if (y_t.K != y0_hat.K || y_t.len != y0_hat.len)
    throw ContractError("posterior: y_t and y0_hat shapes differ");
  const double a = sched.alpha[t];
  const double ab_prev = sched.alpha_bar[t - 1];
  const double Kd = static_cast<double>(y_t.K);
  CategoricalSeq out;
  out.K = y_t.K;
  out.len = y_t.len;
  out.one_hot = false;
  out.probs.assign(y_t.len * y_t.K, 0.0);
  for (std::size_t i = 0; i < y_t.len; ++i) {
    double z = 0.0;
    for (std::size_t k = 0; k < y_t.K; ++k) {
      const double f_fwd = a * y_t.at(i, k) + (1.0 - a) / Kd;
      const double f_start = ab_prev * y0_hat.at(i, k) + (1.0 - ab_prev) / Kd;
      const double theta = f_fwd * f_start;
      out.at(i, k) = theta;
      z += theta;
    }
    if (z <= 0.0 || !std::isfinite(z))
      throw NumericError("posterior: degenerate position (all-zero theta)");
    for (std::size_t k = 0; k < y_t.K; ++k) out.at(i, k) /= z;
  }
  return out;
}

ReverseStepResult reverse_step(const CategoricalSeq& y_t, int t,
                               const NoiseSchedule& sched,
                               const Denoiser& denoiser, Rng& rng) {
  CategoricalSeq y0_hat = denoiser(y_t, t);
  if (y0_hat.K != y_t.K || y0_hat.len != y_t.len)
    throw ContractError("reverse_step: denoiser output shape mismatch");
  CategoricalSeq post = posterior(y_t, y0_hat, t, sched);
  return {sample_categorical(post, rng), std::move(y0_hat)};
}

std::vector<int> generate(std::size_t target_len, std::size_t K,
                          const Denoiser& denoiser, const NoiseSchedule& sched,
                          Rng& rng, int pad_id, std::size_t max_len) {
  if (target_len < 1) throw ContractError("generate: target length must be >= 1");
  if (target_len > max_len)
    throw ContractError("generate: target length exceeds maximum");
  CategoricalSeq y = sample_categorical(CategoricalSeq::uniform(target_len, K), rng);
  for (int t = sched.T; t >= 1; --t)
    y = reverse_step(y, t, sched, denoiser, rng).y_prev;
  std::vector<int> tokens = y.argmax_tokens();
  while (!tokens.empty() && tokens.back() == pad_id) tokens.pop_back();
  return tokens;
}

std::vector<double> timestep_embedding(double t, int dim) {
  if (dim % 2 != 0)
    throw ContractError("timestep_embedding: dim must be even");
  std::vector<double> out(dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double freq =
        std::pow(10000.0, -2.0 * static_cast<double>(i) / dim);
    out[2 * i] = std::sin(t * freq);
    out[2 * i + 1] = std::cos(t * freq);
  }
  return out;
}

}  // namespace differ::diffusion
