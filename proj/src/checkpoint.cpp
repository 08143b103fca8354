//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "differ/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace differ::checkpoint {

namespace {

constexpr char kMagic[] = "differ-ckpt-v1\n";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;

// Serialize integers explicitly little-endian so files are portable across
// hosts regardless of native byte order.
template <typename T>
void put_uint(std::ostream& os, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    os.put(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_uint(std::istream& is) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = is.get();
    if (c == EOF) throw CheckpointError("checkpoint: truncated file");
    value |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return value;
}

void put_string(std::ostream& os, const std::string& s) {
  put_uint<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = get_uint<std::uint32_t>(is);
  std::string s(n, '\0');
  if (!is.read(s.data(), n)) throw CheckpointError("checkpoint: truncated file");
  return s;
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_uint(os, bits);
}

double get_f64(std::istream& is) {
  const auto bits = get_uint<std::uint64_t>(is);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void Checkpoint::add(const std::string& name, std::vector<std::size_t> shape,
                     std::vector<double> values) {
  std::size_t expect = 1;
  for (std::size_t d : shape) expect *= d;
  if (expect != values.size())
    throw CheckpointError("checkpoint: shape does not match data for " + name);
  if (arrays.count(name))
    throw CheckpointError("checkpoint: duplicate array " + name);
  order.push_back(name);
  arrays[name] = {std::move(shape), std::move(values)};
}

void save(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, static_cast<std::streamsize>(kMagicLen));
  put_uint<std::uint64_t>(os, ckpt.config.size());
  for (const auto& [k, v] : ckpt.config) {
    put_string(os, k);
    put_string(os, v);
  }
  put_uint<std::uint64_t>(os, ckpt.order.size());
  for (const auto& name : ckpt.order) {
    const auto& [shape, values] = ckpt.arrays.at(name);
    put_string(os, name);
    put_uint<std::uint32_t>(os, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) put_uint<std::uint64_t>(os, d);
    for (double v : values) put_f64(os, v);
  }
  if (!os) throw CheckpointError("checkpoint: write failed for " + path);
}

Checkpoint load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open " + path);
  char magic[kMagicLen];
  if (!is.read(magic, static_cast<std::streamsize>(kMagicLen)) ||
      std::memcmp(magic, kMagic, kMagicLen) != 0)
    throw CheckpointError("checkpoint: bad magic in " + path);
  Checkpoint ckpt;
  const auto n_config = get_uint<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < n_config; ++i) {
    std::string k = get_string(is);
    ckpt.config[k] = get_string(is);
  }
  const auto n_arrays = get_uint<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < n_arrays; ++i) {
    std::string name = get_string(is);
    const auto ndims = get_uint<std::uint32_t>(is);
    std::vector<std::size_t> shape(ndims);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(get_uint<std::uint64_t>(is));
      total *= d;
    }
    std::vector<double> values(total);
    for (auto& v : values) v = get_f64(is);
    ckpt.add(name, std::move(shape), std::move(values));
  }
  return ckpt;
}

Checkpoint pack_model(const net::Model& model,
                      const std::vector<std::string>& vocab_tokens) {
  const auto& cfg = model.config();
  if (vocab_tokens.size() != cfg.vocab_size)
    throw CheckpointError("checkpoint: vocab size does not match model");
  Checkpoint ckpt;
  ckpt.config["vocab_size"] = std::to_string(cfg.vocab_size);
  ckpt.config["d_model"] = std::to_string(cfg.d_model);
  ckpt.config["n_heads"] = std::to_string(cfg.n_heads);
  ckpt.config["n_layers"] = std::to_string(cfg.n_layers);
  ckpt.config["d_ff"] = std::to_string(cfg.d_ff);
  ckpt.config["max_len"] = std::to_string(cfg.max_len);
  ckpt.config["T"] = std::to_string(cfg.T);
  ckpt.config["dropout"] = std::to_string(cfg.dropout);
  std::ostringstream vocab;
  for (std::size_t i = 0; i < vocab_tokens.size(); ++i) {
    if (i) vocab << '\n';
    vocab << vocab_tokens[i];
  }
  ckpt.config["vocab"] = vocab.str();
  for (const auto& [name, p] : model.params().params)
    ckpt.add(name, p->shape, p->data);
  return ckpt;
}

net::ModelConfig unpack_config(const Checkpoint& ckpt) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = ckpt.config.find(key);
    if (it == ckpt.config.end())
      throw CheckpointError("checkpoint: missing config key " + key);
    return it->second;
  };
  net::ModelConfig cfg;
  cfg.vocab_size = std::stoul(get("vocab_size"));
  cfg.d_model = std::stoul(get("d_model"));
  cfg.n_heads = std::stoul(get("n_heads"));
  cfg.n_layers = std::stoul(get("n_layers"));
  cfg.d_ff = std::stoul(get("d_ff"));
  cfg.max_len = std::stoul(get("max_len"));
  cfg.T = std::stoi(get("T"));
  cfg.dropout = std::stod(get("dropout"));
  cfg.validate();
  return cfg;
}

std::vector<std::string> unpack_vocab(const Checkpoint& ckpt) {
  auto it = ckpt.config.find("vocab");
  if (it == ckpt.config.end())
    throw CheckpointError("checkpoint: missing vocabulary");
  std::vector<std::string> tokens;
  std::istringstream in(it->second);
  std::string tok;
  while (std::getline(in, tok)) tokens.push_back(tok);
  return tokens;
}

void unpack_params(const Checkpoint& ckpt, net::Model& model) {
  for (auto& [name, p] : model.params().params) {
    auto it = ckpt.arrays.find(name);
    if (it == ckpt.arrays.end())
      throw CheckpointError("checkpoint: missing parameter " + name);
    const auto& [shape, values] = it->second;
    if (shape != p->shape)
      throw CheckpointError("checkpoint: shape mismatch for " + name);
    p->data = values;
  }
}

}  // namespace differ::checkpoint
