//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/ensemble.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "differ/diffusion.hpp"

namespace differ::ensemble {

namespace {

// Root rewrite matching the training distribution: a uniformly random mapped
// atom, map-ordered neighbors. Unmapped products fall back to a uniformly
// random root with index order.
std::string augment_product(const smiles::MolGraph& product, Rng& rng,
                            int* root_out) {
  std::vector<int> mapped;
  for (std::size_t i = 0; i < product.atoms.size(); ++i)
    if (product.atoms[i].atom_map != 0) mapped.push_back(static_cast<int>(i));
  smiles::WriteOptions opts;
  opts.include_maps = false;
  int root;
  if (mapped.empty()) {
    root = static_cast<int>(rng.uniform_int(product.atoms.size()));
    opts.order = smiles::WriteOptions::Order::ByIndex;
  } else {
    root = mapped[rng.uniform_int(mapped.size())];
    opts.order = smiles::WriteOptions::Order::ByMap;
  }
  if (root_out != nullptr) *root_out = root;
  return smiles::write(smiles::normalize(product), root, opts);
}

}  // namespace

std::string canonical_set(const std::string& smiles_text) {
  return smiles::canonical(smiles::parse(smiles_text));
}

std::vector<RawSample> sample_candidates(const net::Model& model,
                                         const data::Vocab& vocab,
                                         const smiles::MolGraph& product,
                                         std::size_t n_aug,
                                         std::size_t samples_per_aug,
                                         const LengthPolicy& length, Rng& rng,
                                         std::size_t model_id) {
  if (n_aug < 1) throw EnsembleError("sample_candidates: n_aug must be >= 1");
  if (samples_per_aug < 1)
    throw EnsembleError("sample_candidates: samples_per_aug must be >= 1");
  const auto& cfg = model.config();
  auto sched = diffusion::cosine_schedule(cfg.T);
  std::vector<RawSample> out;
  for (std::size_t aug = 0; aug < n_aug; ++aug) {
    int root = 0;
    const std::string ps = augment_product(product, rng, &root);
    const std::vector<int> ids = vocab.encode(ps);
    Context ctx{nullptr, false, nullptr};
    TensorPtr memory = model.encode(ctx, ids);
    long target_len = 0;
    switch (length.kind) {
      case LengthPolicy::Kind::Predicted:
        target_len = static_cast<long>(ids.size()) +
                     model.predict_length_delta(memory);
        break;
      case LengthPolicy::Kind::FixedOracle:
        target_len = length.fixed;
        break;
      case LengthPolicy::Kind::AlignedOracle: {
        if (length.reactants == nullptr)
          throw EnsembleError("aligned oracle length needs reactants");
        auto [aps, ars] = smiles::root_align(product, *length.reactants, root);
        target_len = static_cast<long>(smiles::lex(ars).size());
        break;
      }
    }
    target_len = std::clamp<long>(target_len, 1,
                                  static_cast<long>(cfg.max_len));
    auto denoise = model.denoiser(memory);
    for (std::size_t s = 0; s < samples_per_aug; ++s) {
      auto tokens = diffusion::generate(static_cast<std::size_t>(target_len),
                                        cfg.vocab_size, denoise, sched, rng,
                                        data::Vocab::kPad, cfg.max_len);
      RawSample sample;
      sample.model_id = model_id;
      sample.text = vocab.decode(tokens);
      try {
        sample.canonical = canonical_set(sample.text);
        sample.valid = true;
      } catch (const std::exception&) {
        sample.valid = false;
      }
      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::pair<CandidateRanking, std::vector<Ballot>> aggregate(
    const std::vector<RawSample>& samples) {
  CandidateRanking ranking;
  ranking.total_samples = samples.size();
  std::map<std::string, std::size_t> counts;
  std::map<std::size_t, std::map<std::string, std::size_t>> per_model;
  for (const auto& s : samples) {
    if (!s.valid) continue;
    ++ranking.valid_samples;
    ++counts[s.canonical];
    ++per_model[s.model_id][s.canonical];
  }
  std::vector<Ballot> ballots;
  for (const auto& [model_id, model_counts] : per_model) {
    Ballot b;
    b.model_id = model_id;
    for (const auto& [cand, n] : model_counts) b.ranked.push_back(cand);
    std::sort(b.ranked.begin(), b.ranked.end(),
              [&](const std::string& x, const std::string& y) {
                const std::size_t cx = model_counts.at(x);
                const std::size_t cy = model_counts.at(y);
                if (cx != cy) return cx > cy;
                return x < y;
              });
    ballots.push_back(std::move(b));
  }
  // group candidates by global count, break ties within each group
  std::map<std::size_t, std::vector<std::string>, std::greater<>> groups;
  for (const auto& [cand, n] : counts) groups[n].push_back(cand);
  for (const auto& [count, group] : groups) {
    std::vector<std::string> ordered =
        group.size() > 1 ? break_ties(group, ballots) : group;
    for (const auto& cand : ordered) {
      RankedCandidate rc;
      rc.candidate = cand;
      rc.count = count;
      rc.frequency = ranking.total_samples == 0
                         ? 0.0
                         : static_cast<double>(count) / ranking.total_samples;
      ranking.entries.push_back(std::move(rc));
    }
  }
  return {std::move(ranking), std::move(ballots)};
}

std::vector<std::string> break_ties(const std::vector<std::string>& tied,
                                    const std::vector<Ballot>& ballots) {
  std::set<std::string> active(tied.begin(), tied.end());
  // elimination rounds; later eliminated = higher final rank
  std::vector<std::vector<std::string>> rounds;
  while (!active.empty()) {
    std::map<std::string, std::size_t> first_choices;
    for (const auto& cand : active) first_choices[cand] = 0;
    for (const auto& b : ballots) {
      for (const auto& cand : b.ranked) {
        if (active.count(cand)) {
          ++first_choices[cand];
          break;
        }
      }
    }
    std::size_t fewest = static_cast<std::size_t>(-1);
    for (const auto& [cand, n] : first_choices) fewest = std::min(fewest, n);
    std::vector<std::string> eliminated;
    for (const auto& [cand, n] : first_choices)
      if (n == fewest) eliminated.push_back(cand);
    std::sort(eliminated.begin(), eliminated.end());
    for (const auto& cand : eliminated) active.erase(cand);
    rounds.push_back(std::move(eliminated));
  }
  std::vector<std::string> out;
  for (auto it = rounds.rbegin(); it != rounds.rend(); ++it)
    out.insert(out.end(), it->begin(), it->end());
  return out;
}

std::vector<double> topk_accuracy(
    const std::vector<CandidateRanking>& rankings,
    const std::vector<std::string>& truths, const std::vector<int>& ks) {
  if (rankings.size() != truths.size())
    throw EnsembleError("topk_accuracy: rankings/truths size mismatch");
  std::vector<double> acc(ks.size(), 0.0);
  if (rankings.empty()) return acc;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const std::size_t k = static_cast<std::size_t>(ks[j]);
      const auto& entries = rankings[i].entries;
      for (std::size_t r = 0; r < entries.size() && r < k; ++r) {
        if (entries[r].candidate == truths[i]) {
          acc[j] += 1.0;
          break;
        }
      }
    }
  }
  for (auto& a : acc) a /= static_cast<double>(rankings.size());
  return acc;
}

std::string format_ranking(const CandidateRanking& ranking) {
  std::ostringstream os;
  os << "rank\tcandidate\tcount\tfrequency\n";
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const auto& e = ranking.entries[i];
    os << (i + 1) << "\t" << e.candidate << "\t" << e.count << "\t"
       << e.frequency << "\n";
  }
  os << "# valid " << ranking.valid_samples << " / total "
     << ranking.total_samples << "\n";
  return os.str();
}

EvalResult evaluate(const std::vector<const net::Model*>& models,
                    const std::vector<const data::Vocab*>& vocabs,
                    const std::vector<data::Reaction>& reactions,
                    std::size_t n_aug, LengthPolicy::Kind length_kind,
                    std::uint64_t seed, const std::vector<int>& ks) {
  if (models.size() != vocabs.size() || models.empty())
    throw EnsembleError("evaluate: need matching model/vocab lists");
  EvalResult result;
  result.reactions = reactions.size();
  std::vector<CandidateRanking> rankings;
  std::vector<std::string> truths;
  std::size_t valid = 0, total = 0, distinct = 0;
  Rng rng(seed);
  for (std::size_t i = 0; i < reactions.size(); ++i) {
    const auto& rec = reactions[i];
    truths.push_back(
        smiles::canonical(smiles::strip_atom_maps(rec.reactants)));
    LengthPolicy policy;
    policy.kind = length_kind;
    policy.reactants = &rec.reactants;
    std::vector<RawSample> all;
    for (std::size_t m = 0; m < models.size(); ++m) {
      Rng model_rng = rng.fork((i << 8) ^ m);
      auto samples = sample_candidates(*models[m], *vocabs[m], rec.product,
                                       n_aug, 1, policy, model_rng, m);
      all.insert(all.end(), samples.begin(), samples.end());
    }
    auto [ranking, ballots] = aggregate(all);
    valid += ranking.valid_samples;
    total += ranking.total_samples;
    distinct += ranking.entries.size();
    rankings.push_back(std::move(ranking));
  }
  auto acc = topk_accuracy(rankings, truths, ks);
  for (std::size_t j = 0; j < ks.size(); ++j) result.topk[ks[j]] = acc[j];
  result.validity = total == 0 ? 0.0 : static_cast<double>(valid) / total;
  result.avg_distinct = reactions.empty()
                            ? 0.0
                            : static_cast<double>(distinct) / reactions.size();
  return result;
}

}  // namespace differ::ensemble
