//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "differ/checkpoint.hpp"
#include "differ/ops.hpp"

namespace differ::train {

using diffusion::CategoricalSeq;
using diffusion::NoiseSchedule;

Example make_example(const data::Reaction& r, const data::Vocab& vocab,
                     Rng& rng) {
  std::vector<int> mapped;
  for (std::size_t i = 0; i < r.product.atoms.size(); ++i)
    if (r.product.atoms[i].atom_map != 0) mapped.push_back(static_cast<int>(i));
  if (mapped.empty())
    throw TrainError("record has no mapped product atoms: " + r.raw);
  const int root = mapped[rng.uniform_int(mapped.size())];
  auto [ps, rs] = smiles::root_align(r.product, r.reactants, root);
  return {vocab.encode(ps), vocab.encode(rs)};
}

Padded pad_augment(const std::vector<int>& product_ids,
                   const std::vector<int>& reactant_ids, std::size_t pad_max,
                   std::size_t max_len, Rng& rng) {
  if (reactant_ids.size() > max_len)
    throw TrainError("reactant sequence longer than max_len");
  std::size_t n = 0;
  if (pad_max > 0) {
    n = 1 + rng.uniform_int(pad_max);
    n = std::min(n, max_len - reactant_ids.size());
    if (n == 0) n = reactant_ids.size() < max_len ? 1 : 0;
  }
  Padded out;
  out.ids = reactant_ids;
  out.ids.insert(out.ids.end(), n, data::Vocab::kPad);
  const long delta = static_cast<long>(out.ids.size()) -
                     static_cast<long>(product_ids.size());
  const long bound = static_cast<long>(max_len);
  out.delta = static_cast<int>(std::clamp(delta, -bound, bound));
  return out;
}

TimeSampler::TimeSampler(int T, std::size_t history)
    : T_(T), history_(history), hist_(T + 1), next_(T + 1, 0), count_(T + 1, 0) {
  if (T < 1) throw ContractError("TimeSampler: T must be >= 1");
  for (int t = 1; t <= T; ++t) hist_[t].assign(history_, 0.0);
}

bool TimeSampler::warmed_up() const {
  for (int t = 1; t <= T_; ++t)
    if (count_[t] < history_) return false;
  return true;
}

std::vector<double> TimeSampler::probabilities() const {
  std::vector<double> p(T_ + 1, 0.0);
  if (!warmed_up()) {
    for (int t = 1; t <= T_; ++t) p[t] = 1.0 / T_;
    return p;
  }
  double z = 0.0;
  for (int t = 1; t <= T_; ++t) {
    double sq = 0.0;
    for (double v : hist_[t]) sq += v * v;
    p[t] = std::sqrt(sq / static_cast<double>(history_)) + 1e-12;
    z += p[t];
  }
  for (int t = 1; t <= T_; ++t) p[t] /= z;
  return p;
}

std::pair<int, double> TimeSampler::sample(Rng& rng) {
  if (!warmed_up()) return {1 + static_cast<int>(rng.uniform_int(T_)), 1.0};
  auto p = probabilities();
  const double u = rng.uniform();
  double acc = 0.0;
  int t = T_;
  for (int cand = 1; cand <= T_; ++cand) {
    acc += p[cand];
    if (u < acc) {
      t = cand;
      break;
    }
  }
  return {t, 1.0 / (T_ * p[t])};
}

void TimeSampler::record(int t, double loss) {
  if (t < 1 || t > T_) throw ContractError("TimeSampler: t out of range");
  hist_[t][next_[t]] = loss;
  next_[t] = (next_[t] + 1) % history_;
  if (count_[t] < history_) ++count_[t];
}

TensorPtr mse_loss(Context& ctx, const TensorPtr& y0_hat, const TensorPtr& y0,
                   bool literal) {
  if (y0_hat->shape != y0->shape)
    throw ContractError("mse_loss: shape mismatch");
  TensorPtr diff;
  if (literal) {
    // the printed form squares both terms before differencing
    diff = ops::add(ctx, ops::affine(ctx, ops::mul(ctx, y0_hat, y0_hat), -1.0, 0.0),
                    ops::mul(ctx, y0, y0));
  } else {
    diff = ops::add(ctx, ops::affine(ctx, y0_hat, -1.0, 0.0), y0);
  }
  return ops::mean(ctx, ops::mul(ctx, diff, diff));
}

TensorPtr vlb_loss(Context& ctx, const TensorPtr& y0_hat,
                   const std::vector<int>& y0_tokens, const CategoricalSeq& y_t,
                   int t, const NoiseSchedule& sched) {
  const std::size_t len = y0_tokens.size();
  const std::size_t K = y0_hat->cols();
  if (y0_hat->rows() != len || y_t.len != len || y_t.K != K)
    throw ContractError("vlb_loss: shape mismatch");
  if (t < 1 || t > sched.T) throw ContractError("vlb_loss: t out of range");
  auto y0 = CategoricalSeq::from_tokens(y0_tokens, K);
  if (t == 1) {
    // NLL of the clean tokens under the prediction, floored before the log
    TensorPtr logp = ops::log(ctx, ops::clamp_min(ctx, y0_hat, 1e-12));
    TensorPtr picked = ops::mul(ctx, logp, make_const({len, K}, y0.probs));
    return ops::affine(ctx, ops::sum(ctx, picked), -1.0 / static_cast<double>(len),
                       0.0);
  }
  // true posterior (constant target of the KL)
  auto p = diffusion::posterior(y_t, y0, t, sched);
  const double a = sched.alpha[t];
  const double ab_prev = sched.alpha_bar[t - 1];
  const double Kd = static_cast<double>(K);
  std::vector<double> fwd(len * K);
  for (std::size_t i = 0; i < len * K; ++i)
    fwd[i] = a * y_t.probs[i] + (1.0 - a) / Kd;
  // unnormalized predicted posterior theta = fwd ⊙ (ab_prev ŷ0 + (1-ab_prev)/K)
  TensorPtr floored = ops::clamp_min(ctx, y0_hat, 1e-12);
  TensorPtr theta =
      ops::mul(ctx, make_const({len, K}, std::move(fwd)),
               ops::affine(ctx, floored, ab_prev, (1.0 - ab_prev) / Kd));
  TensorPtr log_theta = ops::log(ctx, ops::clamp_min(ctx, theta, 1e-300));
  // KL(p||q) with q = theta/Z: Σp log p − Σp log θ + log Z per position
  TensorPtr cross = ops::sum(ctx, ops::mul(ctx, make_const({len, K}, p.probs),
                                           log_theta));
  TensorPtr log_z =
      ops::sum(ctx, ops::log(ctx, ops::clamp_min(ctx, ops::row_sum(ctx, theta),
                                                 1e-300)));
  double entropy = 0.0;  // Σ p log p, a constant
  for (double v : p.probs)
    if (v > 0.0) entropy += v * std::log(v);
  TensorPtr kl_sum = ops::add(ctx, ops::affine(ctx, cross, -1.0, 0.0), log_z);
  return ops::affine(ctx, kl_sum, 1.0 / static_cast<double>(len),
                     entropy / static_cast<double>(len));
}

TensorPtr length_loss(Context& ctx, const TensorPtr& length_logits, int delta,
                      std::size_t max_len) {
  const int bound = static_cast<int>(max_len);
  const int clamped = std::clamp(delta, -bound, bound);
  if (length_logits->cols() != 2 * max_len + 1)
    throw ContractError("length_loss: logits width != 2 max_len + 1");
  return ops::cross_entropy_rows(ctx, length_logits, {clamped + bound});
}

Losses compute_losses(const net::Model& model, Context& ctx,
                      const std::vector<int>& product_ids, const Padded& target,
                      int t, double weight, const NoiseSchedule& sched,
                      const config::TrainConfig& cfg, Rng& rng,
                      TensorPtr* total_out) {
  const std::size_t K = model.config().vocab_size;
  auto y0 = CategoricalSeq::from_tokens(target.ids, K);
  auto y_t = diffusion::sample_categorical(diffusion::q_from_start(y0, t, sched),
                                           rng);
  TensorPtr memory = model.encode(ctx, product_ids);
  TensorPtr logits = model.decode(
      ctx, make_const({y_t.len, K}, y_t.probs), t, memory);
  TensorPtr probs = ops::softmax_rows(ctx, logits);
  TensorPtr mse = mse_loss(ctx, probs, make_const({y0.len, K}, y0.probs),
                           cfg.recon_loss == "literal");
  // The VLB objective carries the reconstruction term sum_k y0 log y0_hat at
  // every step; the timestep-indexed KL applies from t = 2 on. At t = 1 the
  // per-t estimator *is* the reconstruction term, so add it only once.
  TensorPtr per_t = vlb_loss(ctx, probs, target.ids, y_t, t, sched);
  TensorPtr vlb;
  if (t == 1) {
    vlb = per_t;
  } else {
    TensorPtr logp = ops::log(ctx, ops::clamp_min(ctx, probs, 1e-12));
    TensorPtr picked =
        ops::mul(ctx, logp, make_const({y0.len, K}, y0.probs));
    TensorPtr nll = ops::affine(ctx, ops::sum(ctx, picked),
                                -1.0 / static_cast<double>(y0.len), 0.0);
    vlb = ops::add(ctx, nll, ops::affine(ctx, per_t, weight, 0.0));
  }
  TensorPtr len =
      length_loss(ctx, model.length_logits(ctx, memory), target.delta,
                  model.config().max_len);
  TensorPtr total =
      ops::add(ctx, vlb,
               ops::add(ctx, ops::affine(ctx, mse, cfg.lambda_mse, 0.0),
                        ops::affine(ctx, len, cfg.lambda_len, 0.0)));
  if (total_out != nullptr) *total_out = total;
  Losses out;
  out.mse = mse->data[0];
  out.vlb_raw = per_t->data[0];
  out.vlb = vlb->data[0];
  out.len = len->data[0];
  out.total = total->data[0];
  return out;
}

std::string fnv1a_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TrainError("cannot open " + path + " for hashing");
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (is.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<EpochMetrics> fit(const config::TrainConfig& cfg_in) {
  config::TrainConfig cfg = cfg_in;
  const std::string out_dir = config::resolve_out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> load_errors;
  auto reactions = data::load_reactions(cfg.data, &load_errors);
  for (const auto& e : load_errors) std::cerr << "warning: " << e << "\n";
  if (reactions.empty()) throw TrainError("dataset is empty: " + cfg.data);

  // vocabulary over one deterministic aligned rewrite per record
  std::vector<std::string> corpus;
  for (const auto& r : reactions) {
    int root = -1;
    for (std::size_t i = 0; i < r.product.atoms.size() && root < 0; ++i)
      if (r.product.atoms[i].atom_map != 0) root = static_cast<int>(i);
    if (root < 0) throw TrainError("record has no mapped product atoms: " + r.raw);
    auto [ps, rs] = smiles::root_align(r.product, r.reactants, root);
    corpus.push_back(ps);
    corpus.push_back(rs);
  }
  auto vocab = data::Vocab::build(corpus);

  net::ModelConfig mcfg = cfg.model;
  mcfg.vocab_size = vocab.size();
  Rng rng(cfg.seed);
  Rng init_rng = rng.fork(0x1717);
  net::Model model(mcfg, init_rng);
  auto sched = diffusion::cosine_schedule(mcfg.T);
  Adam adam({cfg.lr});
  TimeSampler sampler(mcfg.T);

  std::vector<EpochMetrics> history;
  std::size_t skipped = 0;
  std::vector<std::size_t> order(reactions.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    adam.set_lr(cfg.lr * std::pow(cfg.lr_decay, static_cast<double>(epoch - 1)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    Losses epoch_sum;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, order.size());
      model.params().zero_grad();
      std::size_t in_batch = 0;
      std::vector<std::pair<std::size_t, Losses>> batch_losses;
      for (std::size_t bi = start; bi < stop; ++bi) {
        const auto& record = reactions[order[bi]];
        Example ex;
        Padded padded;
        try {
          ex = make_example(record, vocab, rng);
          padded = pad_augment(ex.product, ex.reactants, cfg.pad_max,
                               mcfg.max_len, rng);
        } catch (const TrainError& e) {
          ++skipped;
          std::cerr << "warning: skipping record " << order[bi] << ": "
                    << e.what() << "\n";
          continue;
        }
        auto [t, weight] = sampler.sample(rng);
        Tape tape;
        Context ctx{&tape, true, &rng};
        TensorPtr total;
        Losses losses = compute_losses(model, ctx, ex.product, padded, t,
                                       weight, sched, cfg, rng, &total);
        if (!std::isfinite(losses.total))
          throw TrainError("non-finite loss at record " +
                           std::to_string(order[bi]));
        sampler.record(t, losses.vlb_raw);
        // average over the batch by scaling each example's contribution
        tape.backward(ops::affine(
            ctx, total, 1.0 / static_cast<double>(stop - start), 0.0));
        ++in_batch;
        epoch_sum.mse += losses.mse;
        epoch_sum.vlb += losses.vlb;
        epoch_sum.len += losses.len;
        epoch_sum.total += losses.total;
        ++seen;
      }
      if (in_batch > 0) adam.step(model.params());
    }
    EpochMetrics m;
    m.epoch = epoch;
    if (seen > 0) {
      m.mean.mse = epoch_sum.mse / seen;
      m.mean.vlb = epoch_sum.vlb / seen;
      m.mean.len = epoch_sum.len / seen;
      m.mean.total = epoch_sum.total / seen;
    }
    history.push_back(m);
    std::cerr << "epoch " << epoch << " total " << m.mean.total << " (mse "
              << m.mean.mse << ", vlb " << m.mean.vlb << ", len " << m.mean.len
              << ")\n";
    // checkpoint every epoch (overwritten)
    auto ckpt = checkpoint::pack_model(model, vocab.tokens);
    ckpt.config["mode"] = cfg.mode;
    ckpt.config["pad_max"] = std::to_string(cfg.pad_max);
    checkpoint::save(ckpt, out_dir + "/model.ckpt");
  }
  if (skipped > 0)
    std::cerr << "warning: skipped " << skipped << " oversized records\n";

  std::ofstream csv(out_dir + "/metrics.csv");
  csv << "epoch,L_MSE,L_VLB,L_len,total\n";
  for (const auto& m : history)
    csv << m.epoch << "," << format_double(m.mean.mse) << ","
        << format_double(m.mean.vlb) << "," << format_double(m.mean.len) << ","
        << format_double(m.mean.total) << "\n";

  nlohmann::json manifest;
  manifest["config"] = {{"d_model", mcfg.d_model},
                        {"n_heads", mcfg.n_heads},
                        {"n_layers", mcfg.n_layers},
                        {"d_ff", mcfg.d_ff},
                        {"max_len", mcfg.max_len},
                        {"T", mcfg.T},
                        {"dropout", mcfg.dropout},
                        {"vocab_size", mcfg.vocab_size},
                        {"lr", cfg.lr},
                        {"epochs", cfg.epochs},
                        {"batch_size", cfg.batch_size},
                        {"pad_max", cfg.pad_max},
                        {"lambda_mse", cfg.lambda_mse},
                        {"lambda_len", cfg.lambda_len},
                        {"recon_loss", cfg.recon_loss},
                        {"mode", cfg.mode}};
  manifest["seed"] = cfg.seed;
  manifest["data"] = cfg.data;
  manifest["data_fnv1a"] = fnv1a_file(cfg.data);
  manifest["checkpoint"] = out_dir + "/model.ckpt";
  manifest["metrics"] = out_dir + "/metrics.csv";
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& m : history)
    epochs.push_back({{"epoch", m.epoch},
                      {"L_MSE", m.mean.mse},
                      {"L_VLB", m.mean.vlb},
                      {"L_len", m.mean.len},
                      {"total", m.mean.total}});
  manifest["epochs"] = epochs;
  std::ofstream mf(out_dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  return history;
}

}  // namespace differ::train
