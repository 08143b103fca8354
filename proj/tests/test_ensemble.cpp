//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>

#include "differ/ensemble.hpp"
#include "differ/synth.hpp"

using namespace differ;
using namespace differ::ensemble;

namespace {

RawSample valid_sample(std::size_t model, const std::string& canonical) {
  RawSample s;
  s.model_id = model;
  s.text = canonical;
  s.valid = true;
  s.canonical = canonical;
  return s;
}

}  // namespace

TEST_CASE("canonical_set ignores component order") {
  CHECK(canonical_set("CCO.CC") == canonical_set("CC.OCC"));
  CHECK_THROWS(canonical_set("C1CC"));
}

TEST_CASE("aggregate counts and orders by frequency") {
  std::vector<RawSample> samples;
  for (int i = 0; i < 3; ++i) samples.push_back(valid_sample(0, "A"));
  for (int i = 0; i < 2; ++i) samples.push_back(valid_sample(0, "B"));
  samples.push_back(valid_sample(0, "C"));
  auto [ranking, ballots] = aggregate(samples);
  REQUIRE(ranking.entries.size() == 3);
  CHECK(ranking.entries[0].candidate == "A");
  CHECK(ranking.entries[0].count == 3);
  CHECK(ranking.entries[1].candidate == "B");
  CHECK(ranking.entries[2].candidate == "C");
  CHECK(ranking.valid_samples == 6);
  CHECK(ranking.entries[0].frequency == doctest::Approx(0.5));
  REQUIRE(ballots.size() == 1);
  CHECK(ballots[0].ranked == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("aggregate excludes invalid samples but counts them in totals") {
  std::vector<RawSample> samples{valid_sample(0, "A")};
  RawSample bad;
  bad.model_id = 0;
  bad.text = "C1CC";
  samples.push_back(bad);
  auto [ranking, ballots] = aggregate(samples);
  CHECK(ranking.total_samples == 2);
  CHECK(ranking.valid_samples == 1);
  CHECK(ranking.entries.size() == 1);
  CHECK(ranking.entries[0].frequency == doctest::Approx(0.5));
  double fsum = 0;
  for (const auto& e : ranking.entries) fsum += e.frequency;
  CHECK(fsum <= 1.0);
}

TEST_CASE("aggregate is invariant under sample permutation") {
  std::vector<RawSample> samples;
  samples.push_back(valid_sample(0, "X"));
  samples.push_back(valid_sample(1, "Y"));
  samples.push_back(valid_sample(0, "Y"));
  samples.push_back(valid_sample(1, "X"));
  samples.push_back(valid_sample(1, "Y"));
  auto [r1, b1] = aggregate(samples);
  std::reverse(samples.begin(), samples.end());
  auto [r2, b2] = aggregate(samples);
  REQUIRE(r1.entries.size() == r2.entries.size());
  for (std::size_t i = 0; i < r1.entries.size(); ++i) {
    CHECK(r1.entries[i].candidate == r2.entries[i].candidate);
    CHECK(r1.entries[i].count == r2.entries[i].count);
  }
}

TEST_CASE("instant-runoff hand example") {
  std::vector<Ballot> ballots{{0, {"A", "B", "C"}},
                              {1, {"B", "A", "C"}},
                              {2, {"B", "C", "A"}}};
  auto order = break_ties({"A", "B", "C"}, ballots);
  CHECK(order == std::vector<std::string>{"B", "A", "C"});
}

TEST_CASE("instant-runoff degenerate cases") {
  // single ballot: its own order
  std::vector<Ballot> one{{0, {"Q", "P", "R"}}};
  CHECK(break_ties({"P", "Q", "R"}, one) ==
        std::vector<std::string>{"Q", "P", "R"});
  // identical ballots: that order
  std::vector<Ballot> same{{0, {"Z", "Y"}}, {1, {"Z", "Y"}}, {2, {"Z", "Y"}}};
  CHECK(break_ties({"Y", "Z"}, same) == std::vector<std::string>{"Z", "Y"});
  // no information at all: lexicographic
  CHECK(break_ties({"m", "k", "z"}, {}) ==
        std::vector<std::string>{"k", "m", "z"});
}

TEST_CASE("instant-runoff output is a permutation, ballot order irrelevant") {
  std::vector<Ballot> ballots{{0, {"A", "C"}}, {1, {"C", "B"}}, {2, {"B", "A", "C"}}};
  auto order = break_ties({"A", "B", "C"}, ballots);
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::string>{"A", "B", "C"});
  std::swap(ballots[0], ballots[2]);
  CHECK(break_ties({"A", "B", "C"}, ballots) == order);
}

TEST_CASE("ties in the global ranking are settled by the ballots") {
  // model 0 votes A, models 1 and 2 vote B; global counts tie at 3
  std::vector<RawSample> samples;
  samples.push_back(valid_sample(0, "A"));
  samples.push_back(valid_sample(0, "A"));
  samples.push_back(valid_sample(0, "A"));
  samples.push_back(valid_sample(1, "B"));
  samples.push_back(valid_sample(1, "B"));
  samples.push_back(valid_sample(2, "B"));
  auto [ranking, ballots] = aggregate(samples);
  REQUIRE(ranking.entries.size() == 2);
  CHECK(ranking.entries[0].count == 3);
  CHECK(ranking.entries[1].count == 3);
  CHECK(ranking.entries[0].candidate == "B");  // two first-choice ballots
  CHECK(ranking.entries[1].candidate == "A");
}

TEST_CASE("top-k accuracy ranks hits correctly") {
  CandidateRanking r;
  for (const std::string c : {"w", "x", "y", "truth", "z"}) {
    RankedCandidate e;
    e.candidate = c;
    r.entries.push_back(e);
  }
  std::vector<CandidateRanking> rankings{r};
  std::vector<std::string> truths{"truth"};  // rank 4
  auto acc = topk_accuracy(rankings, truths, {1, 3, 5, 10});
  CHECK(acc == std::vector<double>{0.0, 0.0, 1.0, 1.0});
  // truth at rank 1
  std::swap(rankings[0].entries[0].candidate, rankings[0].entries[3].candidate);
  acc = topk_accuracy(rankings, truths, {1, 3, 5, 10});
  CHECK(acc == std::vector<double>{1.0, 1.0, 1.0, 1.0});
  // set-order insensitivity via canonicalization
  CHECK(canonical_set("CC.OCC") == canonical_set("CCO.CC"));
}

TEST_CASE("format_ranking emits tab-separated rows and a footer") {
  std::vector<RawSample> samples{valid_sample(0, "CC"), valid_sample(0, "CC"),
                                 valid_sample(0, "CO")};
  auto [ranking, ballots] = aggregate(samples);
  auto text = format_ranking(ranking);
  CHECK(text.find("rank\tcandidate\tcount\tfrequency\n") == 0);
  CHECK(text.find("1\tCC\t2\t") != std::string::npos);
  CHECK(text.find("# valid 3 / total 3") != std::string::npos);
}

TEST_CASE("sampling from an untrained model is deterministic and well-formed") {
  auto lines = synth::generate_reactions(1, 9);
  auto record = data::parse_reaction(lines[0]);
  auto [ps, rs] = smiles::root_align(record.product, record.reactants, 0);
  auto vocab = data::Vocab::build({ps, rs});
  net::ModelConfig mcfg;
  mcfg.vocab_size = vocab.size();
  mcfg.d_model = 16;
  mcfg.n_heads = 2;
  mcfg.n_layers = 1;
  mcfg.d_ff = 32;
  mcfg.max_len = 32;
  mcfg.T = 8;
  mcfg.dropout = 0.0;
  Rng init(31);
  net::Model model(mcfg, init);
  LengthPolicy policy;  // predicted
  Rng r1(4), r2(4);
  auto s1 = sample_candidates(model, vocab, record.product, 3, 1, policy, r1);
  auto s2 = sample_candidates(model, vocab, record.product, 3, 1, policy, r2);
  REQUIRE(s1.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s1[i].text == s2[i].text);
    CHECK(s1[i].valid == s2[i].valid);
    if (s1[i].valid) CHECK_FALSE(s1[i].canonical.empty());
  }
}
