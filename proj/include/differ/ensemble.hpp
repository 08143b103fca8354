//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_ENSEMBLE_HPP
#define DIFFER_ENSEMBLE_HPP

#include <map>
#include <string>
#include <vector>

#include "differ/dataset.hpp"
#include "differ/net.hpp"

namespace differ::ensemble {

struct EnsembleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One generated reactant guess. `canonical` is the sorted canonical
// component string ("reactant set") and is empty when invalid.
struct RawSample {
  std::size_t model_id = 0;
  std::string text;
  bool valid = false;
  std::string canonical;
};

// Per-model preference list: that model's own candidates ordered by its own
// occurrence counts, ties broken lexicographically. No duplicates.
struct Ballot {
  std::size_t model_id = 0;
  std::vector<std::string> ranked;
};

struct RankedCandidate {
  std::string candidate;
  std::size_t count = 0;
  double frequency = 0.0;  // count / total samples (invalid included in total)
};

struct CandidateRanking {
  std::vector<RankedCandidate> entries;
  std::size_t valid_samples = 0;
  std::size_t total_samples = 0;
};

// How the diffusion start length is chosen per augmentation.
struct LengthPolicy {
  enum class Kind {
    Predicted,       // length head: product length + argmax delta
    FixedOracle,     // caller-provided true length
    AlignedOracle,   // exact per-root aligned reactant length (needs reactants)
  };
  Kind kind = Kind::Predicted;
  int fixed = 0;
  const smiles::MolGraph* reactants = nullptr;
};

// canonical reactant-set string of an arbitrary SMILES (components sorted);
// throws on unparseable input
std::string canonical_set(const std::string& smiles_text);

// n_aug root-rewrites of the product, each diffused samples_per_aug times.
// Unparseable outputs are kept with valid = false.
std::vector<RawSample> sample_candidates(const net::Model& model,
                                         const data::Vocab& vocab,
                                         const smiles::MolGraph& product,
                                         std::size_t n_aug,
                                         std::size_t samples_per_aug,
                                         const LengthPolicy& length, Rng& rng,
                                         std::size_t model_id = 0);

// Global counts over valid samples plus per-model ballots; entries ordered
// by count descending with instant-runoff tie-breaking.
std::pair<CandidateRanking, std::vector<Ballot>> aggregate(
    const std::vector<RawSample>& samples);

// Instant-runoff over ballots restricted to `tied`: repeatedly eliminate the
// candidates with fewest first-choices; later elimination ranks higher;
// residual ties broken lexicographically.
std::vector<std::string> break_ties(const std::vector<std::string>& tied,
                                    const std::vector<Ballot>& ballots);

// hit at k iff the canonical truth appears in the first k entries
std::vector<double> topk_accuracy(
    const std::vector<CandidateRanking>& rankings,
    const std::vector<std::string>& truths, const std::vector<int>& ks);

// TSV: rank, candidate, count, frequency; followed by a summary line
std::string format_ranking(const CandidateRanking& ranking);

struct EvalResult {
  std::map<int, double> topk;   // k -> accuracy
  double validity = 0.0;        // valid samples / total samples
  double avg_distinct = 0.0;    // mean distinct candidates per reaction
  std::size_t reactions = 0;
};

EvalResult evaluate(const std::vector<const net::Model*>& models,
                    const std::vector<const data::Vocab*>& vocabs,
                    const std::vector<data::Reaction>& reactions,
                    std::size_t n_aug, LengthPolicy::Kind length_kind,
                    std::uint64_t seed, const std::vector<int>& ks);

}  // namespace differ::ensemble

#endif
