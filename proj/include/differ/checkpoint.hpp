//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_CHECKPOINT_HPP
#define DIFFER_CHECKPOINT_HPP

#include <map>
#include <string>
#include <vector>

#include "differ/net.hpp"

namespace differ::checkpoint {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// On-disk container: magic "differ-ckpt-v1\n", a string key/value section,
// then named little-endian f64 arrays with explicit shapes.
struct Checkpoint {
  std::map<std::string, std::string> config;
  // name -> (shape, values); insertion order preserved for byte determinism
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>>
      arrays;

  void add(const std::string& name, std::vector<std::size_t> shape,
           std::vector<double> values);
};

void save(const Checkpoint& ckpt, const std::string& path);
Checkpoint load(const std::string& path);

// Model round trip: the config section carries every ModelConfig field plus
// the token vocabulary as a single packed string.
Checkpoint pack_model(const net::Model& model,
                      const std::vector<std::string>& vocab_tokens);
net::ModelConfig unpack_config(const Checkpoint& ckpt);
std::vector<std::string> unpack_vocab(const Checkpoint& ckpt);
// Fills an already-built model; every parameter must be present with the
// exact shape.
void unpack_params(const Checkpoint& ckpt, net::Model& model);

}  // namespace differ::checkpoint

#endif
