//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_TRAIN_HPP
#define DIFFER_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "differ/config.hpp"
#include "differ/dataset.hpp"
#include "differ/diffusion.hpp"
#include "differ/net.hpp"

namespace differ::train {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One tokenized training pair: root-aligned product and reactant strings.
struct Example {
  std::vector<int> product;
  std::vector<int> reactants;
};

// Random-rooted aligned rewrite of one record. Roots are drawn uniformly
// over mapped product atoms.
Example make_example(const data::Reaction& r, const data::Vocab& vocab,
                     Rng& rng);

struct Padded {
  std::vector<int> ids;  // reactant tokens + appended pads
  int delta = 0;         // (padded reactant length) - (product length)
};

// Appends n ~ U(1..pad_max) pad tokens (none when pad_max = 0). Throws
// TrainError when even the unpadded sequence exceeds max_len; callers skip
// such records.
Padded pad_augment(const std::vector<int>& product_ids,
                   const std::vector<int>& reactant_ids, std::size_t pad_max,
                   std::size_t max_len, Rng& rng);

// Loss-aware timestep sampling: uniform with weight 1 until every timestep
// has `history` recorded losses, then p_t proportional to sqrt(mean L_t^2)
// with importance weight 1/(T p_t).
class TimeSampler {
 public:
  explicit TimeSampler(int T, std::size_t history = 10);

  std::pair<int, double> sample(Rng& rng);  // (t, importance weight)
  void record(int t, double loss);
  bool warmed_up() const;
  std::vector<double> probabilities() const;  // strictly positive, sums to 1

 private:
  int T_;
  std::size_t history_;
  std::vector<std::vector<double>> hist_;  // per-t ring buffer of losses
  std::vector<std::size_t> next_, count_;
};

struct Losses {
  double mse = 0, vlb = 0, len = 0, total = 0;
  double vlb_raw = 0;  // before importance weighting (feeds the TimeSampler)
};

// Builds the full differentiable objective for one padded example at
// timestep t. When `ctx` carries a tape the caller can run backward on
// *total_out. vlb enters the total multiplied by the importance weight;
// the reported Losses carry the weighted value (the unbiased estimate).
Losses compute_losses(const net::Model& model, Context& ctx,
                      const std::vector<int>& product_ids, const Padded& target,
                      int t, double weight, const diffusion::NoiseSchedule& sched,
                      const config::TrainConfig& cfg, Rng& rng,
                      TensorPtr* total_out);

// mean of (y0 - y0_hat)^2 over all entries, or the literal
// difference-of-squares reading behind cfg.recon_loss = "literal"
TensorPtr mse_loss(Context& ctx, const TensorPtr& y0_hat, const TensorPtr& y0,
                   bool literal);
// t = 1: NLL of y0 under softmax(logits); t >= 2: mean positionwise
// KL(posterior(y_t, y0) || posterior(y_t, softmax(logits)))
TensorPtr vlb_loss(Context& ctx, const TensorPtr& logits,
                   const std::vector<int>& y0_tokens,
                   const diffusion::CategoricalSeq& y_t, int t,
                   const diffusion::NoiseSchedule& sched);
TensorPtr length_loss(Context& ctx, const TensorPtr& length_logits, int delta,
                      std::size_t max_len);

// 64-bit FNV-1a of a file's bytes, hex encoded (dataset fingerprinting)
std::string fnv1a_file(const std::string& path);

struct EpochMetrics {
  std::size_t epoch = 0;
  Losses mean;
};

// Full training run: builds the vocabulary, trains, writes metrics.csv,
// model.ckpt and manifest.json into the resolved output directory.
// Returns the per-epoch metrics.
std::vector<EpochMetrics> fit(const config::TrainConfig& cfg);

}  // namespace differ::train

#endif
