//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/net.hpp"

#include <cmath>

namespace differ::net {

namespace {

constexpr int kLengthQueryToken = 1;

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 3)
    throw ContractError("ModelConfig: vocab must hold pad/query/unknown");
  if (d_model == 0 || n_heads == 0 || n_layers == 0 || d_ff == 0)
    throw ContractError("ModelConfig: zero-sized dimension");
  if (d_model % n_heads != 0)
    throw ContractError("ModelConfig: d_model must divide evenly into heads");
  if (d_model % 2 != 0)
    throw ContractError("ModelConfig: d_model must be even");
  if (max_len == 0) throw ContractError("ModelConfig: max_len must be >= 1");
  if (T < 1) throw ContractError("ModelConfig: T must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ContractError("ModelConfig: dropout must be in [0, 1)");
}

Model::Model(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  build(&rng);
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  build(nullptr);
}

TensorPtr Model::param(const std::string& name, std::size_t rows,
                       std::size_t cols, Rng* rng, double scale) {
  auto t = make_tensor({rows, cols}, true);
  if (rng != nullptr && scale > 0.0)
    for (auto& v : t->data) v = rng->normal() * scale;
  return params_.add(name, t);
}

void Model::build(Rng* rng) {
  const std::size_t d = cfg_.d_model;
  auto xavier = [](std::size_t in, std::size_t out) {
    return std::sqrt(2.0 / static_cast<double>(in + out));
  };
  embed_ = param("embed", cfg_.vocab_size, d, rng, xavier(cfg_.vocab_size, d));

  auto make_attention = [&](const std::string& prefix) {
    Attention at;
    at.wq = param(prefix + ".wq", d, d, rng, xavier(d, d));
    at.wk = param(prefix + ".wk", d, d, rng, xavier(d, d));
    at.wv = param(prefix + ".wv", d, d, rng, xavier(d, d));
    at.wo = param(prefix + ".wo", d, d, rng, xavier(d, d));
    at.bq = param(prefix + ".bq", 1, d, rng, 0.0);
    at.bk = param(prefix + ".bk", 1, d, rng, 0.0);
    at.bv = param(prefix + ".bv", 1, d, rng, 0.0);
    at.bo = param(prefix + ".bo", 1, d, rng, 0.0);
    return at;
  };
  auto make_ln = [&](const std::string& name, TensorPtr& g, TensorPtr& b) {
    g = param(name + ".g", 1, d, rng, 0.0);
    for (auto& v : g->data) v = 1.0;
    b = param(name + ".b", 1, d, rng, 0.0);
  };
  auto make_layer = [&](const std::string& prefix, bool with_cross) {
    Layer layer;
    layer.self = make_attention(prefix + ".self");
    make_ln(prefix + ".ln1", layer.ln1_g, layer.ln1_b);
    if (with_cross) {
      layer.cross = make_attention(prefix + ".cross");
      make_ln(prefix + ".ln2", layer.ln2_g, layer.ln2_b);
    }
    layer.ff_w1 = param(prefix + ".ff.w1", d, cfg_.d_ff, rng, xavier(d, cfg_.d_ff));
    layer.ff_b1 = param(prefix + ".ff.b1", 1, cfg_.d_ff, rng, 0.0);
    layer.ff_w2 = param(prefix + ".ff.w2", cfg_.d_ff, d, rng, xavier(cfg_.d_ff, d));
    layer.ff_b2 = param(prefix + ".ff.b2", 1, d, rng, 0.0);
    make_ln(prefix + ".ln3", layer.ln3_g, layer.ln3_b);
    return layer;
  };
  for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
    enc_.push_back(make_layer("enc." + std::to_string(l), false));
    dec_.push_back(make_layer("dec." + std::to_string(l), true));
  }
  out_w_ = param("out.w", d, cfg_.vocab_size, rng, xavier(d, cfg_.vocab_size));
  out_b_ = param("out.b", 1, cfg_.vocab_size, rng, 0.0);
  len_w1_ = param("len.w1", d, d, rng, xavier(d, d));
  len_b1_ = param("len.b1", 1, d, rng, 0.0);
  len_w2_ = param("len.w2", d, cfg_.length_classes(), rng,
                  xavier(d, cfg_.length_classes()));
  len_b2_ = param("len.b2", 1, cfg_.length_classes(), rng, 0.0);
}

TensorPtr Model::positional(std::size_t len) const {
  const std::size_t d = cfg_.d_model;
  std::vector<double> values(len * d);
  for (std::size_t pos = 0; pos < len; ++pos)
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / d);
      values[pos * d + 2 * i] = std::sin(pos * freq);
      values[pos * d + 2 * i + 1] = std::cos(pos * freq);
    }
  return make_const({len, d}, std::move(values));
}

TensorPtr Model::attention(Context& ctx, const Attention& at,
                           const TensorPtr& q_in, const TensorPtr& kv_in) const {
  const std::size_t dh = cfg_.d_model / cfg_.n_heads;
  TensorPtr q = ops::add_rowvec(ctx, ops::matmul(ctx, q_in, at.wq), at.bq);
  TensorPtr k = ops::add_rowvec(ctx, ops::matmul(ctx, kv_in, at.wk), at.bk);
  TensorPtr v = ops::add_rowvec(ctx, ops::matmul(ctx, kv_in, at.wv), at.bv);
  std::vector<TensorPtr> heads;
  for (std::size_t h = 0; h < cfg_.n_heads; ++h) {
    TensorPtr qh = ops::slice_cols(ctx, q, h * dh, (h + 1) * dh);
    TensorPtr kh = ops::slice_cols(ctx, k, h * dh, (h + 1) * dh);
    TensorPtr vh = ops::slice_cols(ctx, v, h * dh, (h + 1) * dh);
    TensorPtr scores = ops::affine(ctx, ops::matmul_nt(ctx, qh, kh),
                                   1.0 / std::sqrt(static_cast<double>(dh)), 0.0);
    TensorPtr weights = ops::softmax_rows(ctx, scores);
    heads.push_back(ops::matmul(ctx, weights, vh));
  }
  TensorPtr merged = ops::concat_cols(ctx, heads);
  TensorPtr out = ops::add_rowvec(ctx, ops::matmul(ctx, merged, at.wo), at.bo);
  return ops::dropout(ctx, out, cfg_.dropout);
}

TensorPtr Model::feed_forward(Context& ctx, const Layer& layer,
                              const TensorPtr& x) const {
  TensorPtr h = ops::gelu(
      ctx, ops::add_rowvec(ctx, ops::matmul(ctx, x, layer.ff_w1), layer.ff_b1));
  TensorPtr out =
      ops::add_rowvec(ctx, ops::matmul(ctx, h, layer.ff_w2), layer.ff_b2);
  return ops::dropout(ctx, out, cfg_.dropout);
}

TensorPtr Model::encode(Context& ctx,
                        const std::vector<int>& product_tokens) const {
  std::vector<int> ids;
  ids.reserve(product_tokens.size() + 1);
  ids.push_back(kLengthQueryToken);
  for (int t : product_tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= cfg_.vocab_size)
      throw ContractError("encode: token id outside vocabulary");
    ids.push_back(t);
  }
  TensorPtr x = ops::embed(ctx, embed_, ids);
  // scale token embeddings so they are not drowned out by the O(1)
  // positional signal
  x = ops::affine(ctx, x, std::sqrt(static_cast<double>(cfg_.d_model)), 0.0);
  x = ops::add(ctx, x, positional(ids.size()));
  x = ops::dropout(ctx, x, cfg_.dropout);
  for (const Layer& layer : enc_) {
    TensorPtr a = attention(ctx, layer.self, x, x);
    x = ops::layer_norm(ctx, ops::add(ctx, x, a), layer.ln1_g, layer.ln1_b);
    TensorPtr f = feed_forward(ctx, layer, x);
    x = ops::layer_norm(ctx, ops::add(ctx, x, f), layer.ln3_g, layer.ln3_b);
  }
  return x;
}

TensorPtr Model::decode(Context& ctx, const TensorPtr& y_probs, int t,
                        const TensorPtr& memory) const {
  if (y_probs->cols() != cfg_.vocab_size)
    throw ContractError("decode: input distribution width != vocab");
  if (t < 1 || t > cfg_.T) throw ContractError("decode: timestep out of range");
  const std::size_t len = y_probs->rows();
  TensorPtr x = ops::matmul(ctx, y_probs, embed_);  // expected embedding
  x = ops::affine(ctx, x, std::sqrt(static_cast<double>(cfg_.d_model)), 0.0);
  x = ops::add(ctx, x, positional(len));
  auto emb = diffusion::timestep_embedding(static_cast<double>(t),
                                           static_cast<int>(cfg_.d_model));
  x = ops::add_rowvec(ctx, x, make_const({1, cfg_.d_model}, std::move(emb)));
  x = ops::dropout(ctx, x, cfg_.dropout);
  for (const Layer& layer : dec_) {
    TensorPtr a = attention(ctx, layer.self, x, x);
    x = ops::layer_norm(ctx, ops::add(ctx, x, a), layer.ln1_g, layer.ln1_b);
    TensorPtr c = attention(ctx, layer.cross, x, memory);
    x = ops::layer_norm(ctx, ops::add(ctx, x, c), layer.ln2_g, layer.ln2_b);
    TensorPtr f = feed_forward(ctx, layer, x);
    x = ops::layer_norm(ctx, ops::add(ctx, x, f), layer.ln3_g, layer.ln3_b);
  }
  return ops::add_rowvec(ctx, ops::matmul(ctx, x, out_w_), out_b_);
}

TensorPtr Model::length_logits(Context& ctx, const TensorPtr& memory) const {
  TensorPtr query = ops::slice_rows(ctx, memory, 0, 1);
  TensorPtr h = ops::gelu(
      ctx, ops::add_rowvec(ctx, ops::matmul(ctx, query, len_w1_), len_b1_));
  return ops::add_rowvec(ctx, ops::matmul(ctx, h, len_w2_), len_b2_);
}

diffusion::CategoricalSeq Model::predict_y0(const diffusion::CategoricalSeq& y_t,
                                            int t,
                                            const TensorPtr& memory) const {
  if (y_t.K != cfg_.vocab_size)
    throw ContractError("predict_y0: vocab mismatch");
  Context ctx{nullptr, false, nullptr};
  TensorPtr in = make_const({y_t.len, y_t.K}, y_t.probs);
  TensorPtr probs = ops::softmax_rows(ctx, decode(ctx, in, t, memory));
  diffusion::CategoricalSeq out;
  out.K = y_t.K;
  out.len = y_t.len;
  out.one_hot = false;
  out.probs = probs->data;
  return out;
}

diffusion::Denoiser Model::denoiser(const TensorPtr& memory) const {
  return [this, memory](const diffusion::CategoricalSeq& y_t, int t) {
    return predict_y0(y_t, t, memory);
  };
}

int Model::predict_length_delta(const TensorPtr& memory) const {
  Context ctx{nullptr, false, nullptr};
  TensorPtr logits = length_logits(ctx, memory);
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits->cols(); ++k)
    if (logits->data[k] > logits->data[best]) best = k;
  return static_cast<int>(best) - static_cast<int>(cfg_.max_len);
}

}  // namespace differ::net
