//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_NET_HPP
#define DIFFER_NET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "differ/adam.hpp"
#include "differ/diffusion.hpp"
#include "differ/ops.hpp"
#include "differ/tensor.hpp"

namespace differ::net {

struct ModelConfig {
  std::size_t vocab_size = 0;  // token categories, including pad
  std::size_t d_model = 64;
  std::size_t n_heads = 2;
  std::size_t n_layers = 2;
  std::size_t d_ff = 128;
  std::size_t max_len = 64;    // longest reactant sequence the model emits
  int T = 50;                  // diffusion steps
  double dropout = 0.1;

  std::size_t length_classes() const { return 2 * max_len + 1; }
  void validate() const;
};

// Encoder-decoder transformer. The encoder reads the product token sequence
// with a reserved length-query token prepended; the decoder reads per-position
// token distributions plus a timestep signal and cross-attends the encoder
// memory at every layer. No causal mask anywhere: all positions are predicted
// in parallel. Residual blocks are post-norm.
class Model {
 public:
  Model(const ModelConfig& cfg, Rng& rng);  // random init
  explicit Model(const ModelConfig& cfg);   // zero init (checkpoint loading)

  const ModelConfig& config() const { return cfg_; }
  ParamRegistry& params() { return params_; }
  const ParamRegistry& params() const { return params_; }

  // memory over [length query, product tokens]: (1 + len) x d_model
  TensorPtr encode(Context& ctx, const std::vector<int>& product_tokens) const;

  // len x vocab_size logits for the clean-sequence prediction at timestep t;
  // y_probs is the len x vocab_size row-stochastic noisy input
  TensorPtr decode(Context& ctx, const TensorPtr& y_probs, int t,
                   const TensorPtr& memory) const;

  // 1 x (2 max_len + 1) logits over the length delta, from the query row
  TensorPtr length_logits(Context& ctx, const TensorPtr& memory) const;

  // row-stochastic clean-sequence estimate, softmax of decode()
  diffusion::CategoricalSeq predict_y0(const diffusion::CategoricalSeq& y_t,
                                       int t, const TensorPtr& memory) const;

  // inference-only denoiser closure over a fixed product memory
  diffusion::Denoiser denoiser(const TensorPtr& memory) const;

  // argmax length delta decoded back to a signed offset
  int predict_length_delta(const TensorPtr& memory) const;

 private:
  struct Attention {
    TensorPtr wq, wk, wv, wo, bq, bk, bv, bo;
  };
  struct Layer {
    Attention self;
    Attention cross;  // encoder layers leave this empty
    TensorPtr ln1_g, ln1_b, ln2_g, ln2_b, ln3_g, ln3_b;
    TensorPtr ff_w1, ff_b1, ff_w2, ff_b2;
  };

  void build(Rng* rng);
  TensorPtr param(const std::string& name, std::size_t rows, std::size_t cols,
                  Rng* rng, double scale);
  TensorPtr attention(Context& ctx, const Attention& at, const TensorPtr& q_in,
                      const TensorPtr& kv_in) const;
  TensorPtr feed_forward(Context& ctx, const Layer& layer,
                         const TensorPtr& x) const;
  TensorPtr positional(std::size_t len) const;

  ModelConfig cfg_;
  ParamRegistry params_;
  TensorPtr embed_;  // vocab_size x d_model, shared by both towers
  std::vector<Layer> enc_, dec_;
  TensorPtr out_w_, out_b_;
  TensorPtr len_w1_, len_b1_, len_w2_, len_b2_;
};

}  // namespace differ::net

#endif
