// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "occ/checkpoint.hpp"

using namespace occ;

namespace {

EncoderConfig small_enc() {
  EncoderConfig e;
  e.d_window = 8;
  e.d_global = 12;
  e.d_latent = 10;
  e.window_size = 4;
  e.n_window_layers = 1;
  e.n_global_layers = 1;
  e.n_heads_window = 2;
  e.n_heads_global = 2;
  e.pos_patch_side = 8;
  e.pos_global_side = 2;
  return e;
}

DecoderConfig small_dec() {
  DecoderConfig d;
  d.d_model = 8;
  d.n_layers = 1;
  d.n_heads = 2;
  d.n_routed_experts = 4;
  d.n_shared_experts = 1;
  d.top_k = 2;
  d.expert_hidden = 6;
  d.shared_expert_hidden = 8;
  d.max_seq = 32;
  d.d_latent = 10;
  return d;
}

struct Models {
  Rng rng;
  nn::ParamStore<float> ps;
  Encoder<float> enc;
  Decoder<float> dec;
  Models(uint64_t seed, const EncoderConfig& ec, const DecoderConfig& dc)
      : rng(seed), enc(ps, ec, rng), dec(ps, dc, rng) {}
};

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoint round trip restores weights, meta, and optimizer") {
  EncoderConfig ec = small_enc();
  DecoderConfig dc = small_dec();
  Models a(11, ec, dc);
  nn::AdamW<float> opt_a(a.ps, {});
  // make optimizer state nonzero
  for (auto& t : a.ps.tensors()) t->g.setConstant(0.25f);
  opt_a.step(a.ps, 1e-3);
  TrainMeta meta{7, 11, 12345};
  std::string path = tmp_path("occ_ckpt_rt.bin");
  save_checkpoint(path, ec, dc, a.ps, meta, &opt_a);

  Models b(99, ec, dc);  // different init, same topology
  nn::AdamW<float> opt_b(b.ps, {});
  CheckpointInfo info = load_checkpoint(path, b.ps, &opt_b);

  CHECK(info.meta.step == 7);
  CHECK(info.meta.seed == 11);
  CHECK(info.meta.tokens_seen == 12345);
  CHECK(info.has_opt);
  CHECK(info.enc.d_window == 8);
  CHECK(info.dec.expert_hidden == 6);
  REQUIRE(a.ps.tensors().size() == b.ps.tensors().size());
  for (size_t i = 0; i < a.ps.tensors().size(); ++i) {
    CHECK(a.ps.tensors()[i]->name == b.ps.tensors()[i]->name);
    CHECK((a.ps.tensors()[i]->v - b.ps.tensors()[i]->v).cwiseAbs().maxCoeff() == 0.0f);
  }
  CHECK(opt_b.step_count() == opt_a.step_count());
  for (size_t i = 0; i < opt_a.states().size(); ++i) {
    CHECK((opt_a.states()[i].m - opt_b.states()[i].m).cwiseAbs().maxCoeff() == 0.0f);
    CHECK((opt_a.states()[i].v - opt_b.states()[i].v).cwiseAbs().maxCoeff() == 0.0f);
  }
  std::remove(path.c_str());
}

TEST_CASE("peek reads configs without a parameter store") {
  EncoderConfig ec = small_enc();
  DecoderConfig dc = small_dec();
  Models a(3, ec, dc);
  std::string path = tmp_path("occ_ckpt_peek.bin");
  save_checkpoint(path, ec, dc, a.ps, {42, 3, 999}, nullptr);
  CheckpointInfo info = peek_checkpoint(path);
  CHECK(info.meta.step == 42);
  CHECK(!info.has_opt);
  CHECK(info.enc.pos_patch_side == 8);
  CHECK(info.dec.max_seq == 32);
  std::remove(path.c_str());
}

TEST_CASE("loading rejects mismatched topologies and damaged files") {
  EncoderConfig ec = small_enc();
  DecoderConfig dc = small_dec();
  Models a(5, ec, dc);
  std::string path = tmp_path("occ_ckpt_bad.bin");
  save_checkpoint(path, ec, dc, a.ps, {}, nullptr);

  SUBCASE("different topology") {
    DecoderConfig dc2 = dc;
    dc2.n_layers = 2;
    Models b(5, ec, dc2);
    CHECK_THROWS_AS(load_checkpoint(path, b.ps, nullptr), Error);
  }
  SUBCASE("truncated payload") {
    auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 64);
    Models b(5, ec, dc);
    CHECK_THROWS_AS(load_checkpoint(path, b.ps, nullptr), Error);
  }
  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXXXXXX", 8);
    f.close();
    CHECK_THROWS_AS(peek_checkpoint(path), Error);
  }
  SUBCASE("optimizer requested but absent") {
    Models b(5, ec, dc);
    nn::AdamW<float> opt(b.ps, {});
    CHECK_THROWS_AS(load_checkpoint(path, b.ps, &opt), Error);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(peek_checkpoint(tmp_path("occ_no_such.bin")), Error); }
  std::remove(path.c_str());
}
