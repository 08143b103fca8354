//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "differ/checkpoint.hpp"
#include "differ/config.hpp"
#include "differ/ensemble.hpp"
#include "differ/synth.hpp"
#include "differ/train.hpp"

namespace {

using namespace differ;

struct LoadedModel {
  std::unique_ptr<net::Model> model;
  data::Vocab vocab;
  std::string mode;
};

LoadedModel load_model(const std::string& path) {
  auto ckpt = checkpoint::load(path);
  LoadedModel lm;
  lm.model = std::make_unique<net::Model>(checkpoint::unpack_config(ckpt));
  checkpoint::unpack_params(ckpt, *lm.model);
  lm.vocab = data::Vocab::from_tokens(checkpoint::unpack_vocab(ckpt));
  if (auto it = ckpt.config.find("mode"); it != ckpt.config.end())
    lm.mode = it->second;
  return lm;
}

int cmd_train(const std::string& config_path) {
  auto cfg = config::load_train_config(config_path);
  train::fit(cfg);
  return 0;
}

int cmd_sample(const std::vector<std::string>& ckpts, const std::string& product,
               std::uint64_t seed, std::size_t n_aug, long oracle_length) {
  smiles::MolGraph graph = smiles::parse(product);
  std::vector<LoadedModel> models;
  for (const auto& p : ckpts) models.push_back(load_model(p));
  ensemble::LengthPolicy policy;
  if (oracle_length > 0) {
    policy.kind = ensemble::LengthPolicy::Kind::FixedOracle;
    policy.fixed = static_cast<int>(oracle_length);
  }
  Rng rng(seed);
  std::vector<ensemble::RawSample> all;
  for (std::size_t m = 0; m < models.size(); ++m) {
    Rng model_rng = rng.fork(m);
    auto samples = ensemble::sample_candidates(
        *models[m].model, models[m].vocab, graph, n_aug, 1, policy, model_rng, m);
    all.insert(all.end(), samples.begin(), samples.end());
  }
  auto [ranking, ballots] = ensemble::aggregate(all);
  if (ranking.valid_samples == 0)
    std::cout << "# no valid samples out of " << ranking.total_samples << "\n";
  std::cout << ensemble::format_ranking(ranking);
  return 0;
}

int cmd_eval(const std::vector<std::string>& ckpts, const std::string& test_path,
             const std::string& mode, std::uint64_t seed, std::size_t n_aug) {
  std::vector<LoadedModel> models;
  for (const auto& p : ckpts) models.push_back(load_model(p));
  std::vector<std::string> errors;
  auto reactions = data::load_reactions(test_path, &errors);
  for (const auto& e : errors) std::cerr << "warning: " << e << "\n";
  ensemble::LengthPolicy::Kind kind =
      mode == "oracle" ? ensemble::LengthPolicy::Kind::AlignedOracle
                       : ensemble::LengthPolicy::Kind::Predicted;
  std::vector<const net::Model*> model_ptrs;
  std::vector<const data::Vocab*> vocab_ptrs;
  for (const auto& lm : models) {
    model_ptrs.push_back(lm.model.get());
    vocab_ptrs.push_back(&lm.vocab);
  }
  const std::vector<int> ks{1, 3, 5, 10};
  auto result = ensemble::evaluate(model_ptrs, vocab_ptrs, reactions, n_aug,
                                   kind, seed, ks);
  std::cout << "top_1\ttop_3\ttop_5\ttop_10\tsample_validity\tavg_num_reactants\n";
  std::cout << result.topk.at(1) << "\t" << result.topk.at(3) << "\t"
            << result.topk.at(5) << "\t" << result.topk.at(10) << "\t"
            << result.validity << "\t" << result.avg_distinct << "\n";
  return 0;
}

int cmd_synth(const std::string& out, std::size_t n, std::uint64_t seed) {
  synth::write_reactions(synth::generate_reactions(n, seed), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"categorical-diffusion retrosynthesis toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "train a model from a config");
  train_cmd->add_option("--config", config_path, "flat key=value config file")
      ->required();

  std::vector<std::string> ckpts;
  std::string product, test_path, mode = "variant";
  std::uint64_t seed = 1;
  std::size_t n_aug = 20, n_records = 1000;
  long oracle_length = 0;
  std::string synth_out;

  auto* sample_cmd = app.add_subcommand("sample", "rank reactant candidates");
  sample_cmd->add_option("--ckpt", ckpts, "checkpoint file(s)")->required();
  sample_cmd->add_option("--product", product, "product SMILES")->required();
  sample_cmd->add_option("--seed", seed, "random seed");
  sample_cmd->add_option("--n-aug", n_aug, "product augmentations per model");
  sample_cmd->add_option("--oracle-length", oracle_length,
                         "true reactant token length (ablation)");

  auto* eval_cmd = app.add_subcommand("eval", "top-k evaluation on a test set");
  eval_cmd->add_option("--ckpt", ckpts, "checkpoint file(s)")->required();
  eval_cmd->add_option("--test", test_path, "reaction file")->required();
  eval_cmd->add_option("--mode", mode, "variant|baseline|oracle")
      ->check(CLI::IsMember({"variant", "baseline", "oracle"}));
  eval_cmd->add_option("--seed", seed, "random seed");
  eval_cmd->add_option("--n-aug", n_aug, "product augmentations per model");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--out", synth_out, "output reaction file")->required();
  synth_cmd->add_option("--n", n_records, "number of records")->required();
  synth_cmd->add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
    if (train_cmd->parsed()) return cmd_train(config_path);
    if (sample_cmd->parsed())
      return cmd_sample(ckpts, product, seed, n_aug, oracle_length);
    if (eval_cmd->parsed())
      return cmd_eval(ckpts, test_path, mode, seed, n_aug);
    if (synth_cmd->parsed()) return cmd_synth(synth_out, n_records, seed);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const config::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const data::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const smiles::LexError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const smiles::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const smiles::AlignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const checkpoint::CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const train::TrainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
