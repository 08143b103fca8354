//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "differ/checkpoint.hpp"

using namespace differ;
using checkpoint::Checkpoint;
using checkpoint::CheckpointError;

namespace {

struct TempPath {
  std::string path;
  TempPath() { path = std::string(std::tmpnam(nullptr)) + ".ckpt"; }
  ~TempPath() { std::remove(path.c_str()); }
};

net::ModelConfig tiny_config() {
  net::ModelConfig cfg;
  cfg.vocab_size = 6;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.n_layers = 1;
  cfg.d_ff = 12;
  cfg.max_len = 10;
  cfg.T = 4;
  cfg.dropout = 0.1;
  return cfg;
}

const std::vector<std::string> kVocab{"<pad>", "<len>", "<unk>", "C", "O", "N"};

}  // namespace

TEST_CASE("raw container round trip") {
  Checkpoint ckpt;
  ckpt.config["alpha"] = "1.5";
  ckpt.config["name"] = "tiny";
  ckpt.add("w", {2, 3}, {1, 2, 3, 4.25, -5, 6e-17});
  ckpt.add("b", {3}, {0.5, 0, -0.5});
  TempPath f;
  checkpoint::save(ckpt, f.path);
  auto loaded = checkpoint::load(f.path);
  CHECK(loaded.config == ckpt.config);
  CHECK(loaded.order == ckpt.order);
  CHECK(loaded.arrays.at("w") == ckpt.arrays.at("w"));
  CHECK(loaded.arrays.at("b") == ckpt.arrays.at("b"));
}

TEST_CASE("container rejects inconsistent additions") {
  Checkpoint ckpt;
  CHECK_THROWS_AS(ckpt.add("w", {2, 2}, {1, 2, 3}), CheckpointError);
  ckpt.add("w", {1}, {1});
  CHECK_THROWS_AS(ckpt.add("w", {1}, {2}), CheckpointError);
}

TEST_CASE("bad magic and truncation are explicit errors") {
  TempPath f;
  {
    std::ofstream os(f.path, std::ios::binary);
    os << "not-a-checkpoint";
  }
  CHECK_THROWS_AS(checkpoint::load(f.path), CheckpointError);
  // valid file, then truncated
  Checkpoint ckpt;
  ckpt.add("w", {4}, {1, 2, 3, 4});
  checkpoint::save(ckpt, f.path);
  std::string bytes;
  {
    std::ifstream is(f.path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(is), {});
  }
  {
    std::ofstream os(f.path, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
  }
  CHECK_THROWS_AS(checkpoint::load(f.path), CheckpointError);
  CHECK_THROWS_AS(checkpoint::load("/nonexistent/nowhere.ckpt"), CheckpointError);
}

TEST_CASE("model round trip restores parameters bitwise") {
  Rng rng(41);
  net::Model model(tiny_config(), rng);
  auto ckpt = checkpoint::pack_model(model, kVocab);
  TempPath f;
  checkpoint::save(ckpt, f.path);
  auto loaded = checkpoint::load(f.path);
  auto cfg = checkpoint::unpack_config(loaded);
  CHECK(cfg.d_model == 8);
  CHECK(cfg.vocab_size == 6);
  CHECK(cfg.dropout == doctest::Approx(0.1));
  CHECK(checkpoint::unpack_vocab(loaded) == kVocab);
  net::Model restored(cfg);
  checkpoint::unpack_params(loaded, restored);
  for (std::size_t i = 0; i < model.params().params.size(); ++i) {
    CHECK(model.params().params[i].first == restored.params().params[i].first);
    CHECK(model.params().params[i].second->data ==
          restored.params().params[i].second->data);
  }
}

TEST_CASE("saving twice produces identical bytes") {
  Rng rng(43);
  net::Model model(tiny_config(), rng);
  auto ckpt = checkpoint::pack_model(model, kVocab);
  TempPath f1, f2;
  checkpoint::save(ckpt, f1.path);
  checkpoint::save(ckpt, f2.path);
  std::ifstream a(f1.path, std::ios::binary), b(f2.path, std::ios::binary);
  std::string ba(std::istreambuf_iterator<char>(a), {});
  std::string bb(std::istreambuf_iterator<char>(b), {});
  CHECK(ba == bb);
  CHECK(ba.rfind("differ-ckpt-v1\n", 0) == 0);
}

TEST_CASE("missing or misshapen parameters are rejected") {
  Rng rng(47);
  net::Model model(tiny_config(), rng);
  auto ckpt = checkpoint::pack_model(model, kVocab);
  net::Model target(tiny_config());
  // drop one array
  Checkpoint incomplete = ckpt;
  incomplete.arrays.erase("out.b");
  CHECK_THROWS_AS(checkpoint::unpack_params(incomplete, target), CheckpointError);
  // distort a shape
  Checkpoint wrong = ckpt;
  wrong.arrays["out.b"].first = {2, 3};
  CHECK_THROWS_AS(checkpoint::unpack_params(wrong, target), CheckpointError);
  // vocab size mismatch at pack time
  CHECK_THROWS_AS(checkpoint::pack_model(model, {"<pad>"}), CheckpointError);
}
