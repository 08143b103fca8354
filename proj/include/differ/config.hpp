//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_CONFIG_HPP
#define DIFFER_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>

#include "differ/net.hpp"

namespace differ::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "key = value" text file; '#' starts a comment. Unknown keys are
// rejected with the full list of valid ones.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

struct TrainConfig {
  net::ModelConfig model;
  std::string data;          // reaction file
  std::string out_dir = "."; // overridable via the DIFFER_OUT_DIR env var
  double lr = 1e-4;
  double lr_decay = 1.0;     // per-epoch multiplicative factor
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  std::uint64_t seed = 1;
  std::size_t pad_max = 20;  // N; 0 disables pad augmentation
  double lambda_mse = 1.0;
  double lambda_len = 1.0;
  std::string recon_loss = "mse";  // or "literal" (difference of squares)
  // variant-pad / baseline-length / oracle-length; the last two train
  // identically with pad_max forced to 0 and differ only at inference
  std::string mode = "variant-pad";
};

TrainConfig load_train_config(const std::string& path);

// applies the DIFFER_OUT_DIR override
std::string resolve_out_dir(const std::string& configured);

}  // namespace differ::config

#endif
