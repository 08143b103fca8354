//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_DIFFUSION_HPP
#define DIFFER_DIFFUSION_HPP

#include <functional>
#include <vector>

#include "differ/rng.hpp"
#include "differ/tensor.hpp"

namespace differ::diffusion {

// beta/alpha arrays are indexed by timestep t in 1..T; index 0 is the
// alpha_bar(0) := 1 convention, so the t = 1 reverse step is well defined.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;       // beta[1..T]
  std::vector<double> alpha;      // alpha[t] = 1 - beta[t]
  std::vector<double> alpha_bar;  // alpha_bar[0] = 1, strictly decreasing
};

NoiseSchedule cosine_schedule(int T);

// Sequence of per-position categorical distributions over K tokens, stored
// row-major as len x K with each row summing to 1. One-hot sequences carry
// exactly one 1 per row.
struct CategoricalSeq {
  std::size_t K = 0;
  std::size_t len = 0;
  bool one_hot = false;
  std::vector<double> probs;  // len x K

  double& at(std::size_t pos, std::size_t k) { return probs[pos * K + k]; }
  double at(std::size_t pos, std::size_t k) const { return probs[pos * K + k]; }

  static CategoricalSeq from_tokens(const std::vector<int>& tokens,
                                    std::size_t K);
  static CategoricalSeq uniform(std::size_t len, std::size_t K);
  std::vector<int> argmax_tokens() const;
  // row-stochastic within tol; one-hot rows exactly {0,1}
  void validate(double tol = 1e-9) const;
};

// Eq.: q(y_t | y_{t-1}) mixes toward uniform with probability beta_t.
CategoricalSeq q_step(const CategoricalSeq& y_prev, int t,
                      const NoiseSchedule& sched);
// Closed form q(y_t | y_0) via alpha_bar.
CategoricalSeq q_from_start(const CategoricalSeq& y0, int t,
                            const NoiseSchedule& sched);
// Gumbel-max sampling; outcome distribution equals dist per position.
CategoricalSeq sample_categorical(const CategoricalSeq& dist, Rng& rng);
// theta_post(y_t, y0_hat): product of the forward factor and the
// alpha_bar(t-1) mixture, normalized per position.
CategoricalSeq posterior(const CategoricalSeq& y_t,
                         const CategoricalSeq& y0_hat, int t,
                         const NoiseSchedule& sched);

// maps (y_t, t) -> row-stochastic y0_hat of the same shape; the conditioning
// memory is captured by the callable
using Denoiser = std::function<CategoricalSeq(const CategoricalSeq& y_t, int t)>;

struct ReverseStepResult {
  CategoricalSeq y_prev;  // one-hot sample
  CategoricalSeq y0_hat;
};

ReverseStepResult reverse_step(const CategoricalSeq& y_t, int t,
                               const NoiseSchedule& sched,
                               const Denoiser& denoiser, Rng& rng);

// Full loop from uniform noise of length target_len down to t = 1; trailing
// pad tokens are stripped from the result.
std::vector<int> generate(std::size_t target_len, std::size_t K,
                          const Denoiser& denoiser, const NoiseSchedule& sched,
                          Rng& rng, int pad_id, std::size_t max_len);

// sinusoidal embedding of scalar t, sin/cos pairs over base-10000 frequencies
std::vector<double> timestep_embedding(double t, int dim);

}  // namespace differ::diffusion

#endif
