//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace differ::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

const std::set<std::string> kValidKeys = {
    "d_model",    "n_heads",   "n_layers",  "d_ff",       "max_len",
    "T",          "dropout",   "data",      "out_dir",    "lr",
    "lr_decay",   "epochs",     "batch_size", "seed",     "pad_max",    "lambda_mse",
    "lambda_len", "recon_loss", "mode"};

}  // namespace

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key " + key);
  }
  return kv;
}

TrainConfig load_train_config(const std::string& path) {
  auto kv = parse_kv_file(path);
  for (const auto& [k, v] : kv) {
    if (!kValidKeys.count(k)) {
      std::ostringstream msg;
      msg << "unknown config key '" << k << "'; valid keys:";
      for (const auto& valid : kValidKeys) msg << " " << valid;
      throw ConfigError(msg.str());
    }
  }
  TrainConfig cfg;
  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    return it == kv.end() ? std::string() : it->second;
  };
  auto set_sizet = [&](const std::string& key, std::size_t& out) {
    if (auto v = get(key); !v.empty()) out = std::stoul(v);
  };
  auto set_double = [&](const std::string& key, double& out) {
    if (auto v = get(key); !v.empty()) out = std::stod(v);
  };
  set_sizet("d_model", cfg.model.d_model);
  set_sizet("n_heads", cfg.model.n_heads);
  set_sizet("n_layers", cfg.model.n_layers);
  set_sizet("d_ff", cfg.model.d_ff);
  set_sizet("max_len", cfg.model.max_len);
  if (auto v = get("T"); !v.empty()) cfg.model.T = std::stoi(v);
  set_double("dropout", cfg.model.dropout);
  if (auto v = get("data"); !v.empty()) cfg.data = v;
  if (auto v = get("out_dir"); !v.empty()) cfg.out_dir = v;
  set_double("lr", cfg.lr);
  set_double("lr_decay", cfg.lr_decay);
  set_sizet("epochs", cfg.epochs);
  set_sizet("batch_size", cfg.batch_size);
  if (auto v = get("seed"); !v.empty()) cfg.seed = std::stoull(v);
  set_sizet("pad_max", cfg.pad_max);
  set_double("lambda_mse", cfg.lambda_mse);
  set_double("lambda_len", cfg.lambda_len);
  if (auto v = get("recon_loss"); !v.empty()) {
    if (v != "mse" && v != "literal")
      throw ConfigError("recon_loss must be 'mse' or 'literal', got '" + v + "'");
    cfg.recon_loss = v;
  }
  if (auto v = get("mode"); !v.empty()) {
    if (v != "variant-pad" && v != "baseline-length" && v != "oracle-length")
      throw ConfigError(
          "mode must be variant-pad, baseline-length or oracle-length");
    cfg.mode = v;
  }
  if (cfg.mode != "variant-pad") cfg.pad_max = 0;  // no pad augmentation
  if (cfg.data.empty()) throw ConfigError("config is missing 'data'");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  return cfg;
}

std::string resolve_out_dir(const std::string& configured) {
  if (const char* env = std::getenv("DIFFER_OUT_DIR"); env != nullptr && *env)
    return env;
  return configured;
}

}  // namespace differ::config
