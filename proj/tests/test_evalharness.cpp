// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "occ/evalharness.hpp"

using namespace occ;

namespace {

// Independent oracle: memoized recursive Levenshtein, structured nothing like
// the two-row iterative version under test.
int64_t ed_oracle(const std::string& a, const std::string& b) {
  std::map<std::pair<size_t, size_t>, int64_t> memo;
  std::function<int64_t(size_t, size_t)> go = [&](size_t i, size_t j) -> int64_t {
    if (i == a.size()) return static_cast<int64_t>(b.size() - j);
    if (j == b.size()) return static_cast<int64_t>(a.size() - i);
    auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int64_t best = go(i + 1, j + 1) + (a[i] != b[j]);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

std::vector<std::string> all_ab_strings(size_t max_len) {
  std::vector<std::string> out = {""};
  std::vector<std::string> frontier = {""};
  for (size_t l = 1; l <= max_len; ++l) {
    std::vector<std::string> next;
    for (const auto& s : frontier)
      for (char c : {'a', 'b'}) next.push_back(s + c);
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::filesystem::path fresh_dir(const char* name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string rand_word(Rng& rng, int max_len) {
  int len = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(max_len + 1)));
  std::string s;
  for (int i = 0; i < len; ++i)
    s.push_back(static_cast<char>('a' + rng.uniform_index(4)));
  return s;
}

}  // namespace

TEST_CASE("edit distance matches a memoized recursive oracle exhaustively") {
  auto strs = all_ab_strings(6);  // 127 strings
  REQUIRE(strs.size() == 127);
  // stride the pair grid to keep the case fast while covering all lengths
  for (size_t i = 0; i < strs.size(); ++i)
    for (size_t j = i % 3; j < strs.size(); j += 3)
      REQUIRE(edit_distance(strs[i], strs[j]) == ed_oracle(strs[i], strs[j]));
}

TEST_CASE("edit distance pins and axioms") {
  CHECK(edit_distance("", "") == 0);
  CHECK(edit_distance("abc", "") == 3);
  CHECK(edit_distance("", "abcd") == 4);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("flaw", "lawn") == 2);
  CHECK(edit_distance("abcdef", "abcdef") == 0);

  Rng rng(42);
  for (int it = 0; it < 200; ++it) {
    std::string a = rand_word(rng, 12), b = rand_word(rng, 12), c = rand_word(rng, 12);
    int64_t ab = edit_distance(a, b);
    CHECK(ab == edit_distance(b, a));
    CHECK(ab >= std::llabs(static_cast<long long>(a.size()) - static_cast<long long>(b.size())));
    CHECK(ab <= static_cast<int64_t>(std::max(a.size(), b.size())));
    CHECK(ab <= edit_distance(a, c) + edit_distance(c, b));
    CHECK((ab == 0) == (a == b));
  }
}

TEST_CASE("whitespace normalization collapses runs and trims") {
  CHECK(normalize_ws("a  b\n\nc ") == "a b c");
  CHECK(normalize_ws("\n\t hello\tworld\r\n") == "hello world");
  CHECK(normalize_ws("already clean") == "already clean");
  CHECK(normalize_ws("") == "");
  CHECK(normalize_ws("   ") == "");
}

TEST_CASE("decode precision behaves at the edges") {
  CHECK(decode_precision("abcd", "abcd") == 1.0);
  CHECK(decode_precision("abcd", "") == 0.0);
  CHECK(decode_precision("", "") == 1.0);
  CHECK(decode_precision("abcd", "abcx") == doctest::Approx(0.75));
  CHECK(decode_precision("a b", "a\nb") == 1.0);
  CHECK(decode_precision("ab cd", "ab  cd") == 1.0);

  Rng rng(9);
  for (int it = 0; it < 300; ++it) {
    std::string a = rand_word(rng, 20), b = rand_word(rng, 20);
    double p = decode_precision(a, b);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(decode_precision(a, a) == 1.0);
  }
}

TEST_CASE("token precision mirrors the character metric for this codec") {
  CHECK(token_precision("hello world", "hello world") == 1.0);
  CHECK(token_precision("abcd", "abcx") == doctest::Approx(0.75));
  CHECK(token_precision("abcd", "") == 0.0);
}

TEST_CASE("echo decoder scores a perfect study") {
  StudyConfig cfg;
  cfg.seed = 77;
  cfg.docs_per_bucket = 3;
  cfg.buckets = {{ResolutionMode::Tiny, 128}, {ResolutionMode::Tiny, 512},
                 {ResolutionMode::Small, 250}};
  StudyResult res = run_compression_study(cfg, echo_decoder());
  REQUIRE(res.records.size() == 9);
  REQUIRE(res.buckets.size() == 3);
  for (const auto& r : res.records) {
    CHECK(r.precision == 1.0);
    CHECK(r.token_prec == 1.0);
    CHECK(r.edit_dist == 0);
  }
  CHECK(res.buckets[0].precision_mean == 1.0);
  CHECK(res.buckets[0].ratio == doctest::Approx(2.0));
  CHECK(res.buckets[1].ratio == doctest::Approx(8.0));
  CHECK(res.buckets[2].ratio == doctest::Approx(2.5));
  CHECK(res.records[0].vision_tokens == 64);
  CHECK(res.records[8].vision_tokens == 100);
}

TEST_CASE("empty decoder scores zero and the study is deterministic") {
  StudyConfig cfg;
  cfg.seed = 78;
  cfg.docs_per_bucket = 2;
  cfg.buckets = {{ResolutionMode::Tiny, 128}};
  StudyResult a = run_compression_study(cfg, empty_decoder());
  StudyResult b = run_compression_study(cfg, empty_decoder());
  REQUIRE(a.records.size() == 2);
  for (const auto& r : a.records) {
    CHECK(r.precision == 0.0);
    CHECK(r.pred_len == 0);
  }
  REQUIRE(b.records.size() == a.records.size());
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].doc_seed == b.records[i].doc_seed);
    CHECK(a.records[i].edit_dist == b.records[i].edit_dist);
  }
}

TEST_CASE("study writes csvs and worst-case dumps") {
  auto dir = fresh_dir("occ_eval_out");
  StudyConfig cfg;
  cfg.seed = 79;
  cfg.docs_per_bucket = 2;
  cfg.buckets = {{ResolutionMode::Tiny, 128}, {ResolutionMode::Tiny, 256}};
  cfg.out_dir = dir.string();
  cfg.dump_worst = 2;
  run_compression_study(cfg, empty_decoder());

  std::ifstream rec(dir / "records.csv");
  REQUIRE(rec.is_open());
  std::string line;
  std::getline(rec, line);
  CHECK(line ==
        "bucket,mode,doc_seed,n_text_tokens,vision_tokens,ratio,precision,token_precision,"
        "edit_distance,pred_len,stop");
  int rows = 0;
  while (std::getline(rec, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);

  std::ifstream sum(dir / "summary.csv");
  REQUIRE(sum.is_open());
  std::getline(sum, line);
  CHECK(line ==
        "bucket,mode,n_tokens,n_docs,ratio,precision_mean,precision_min,precision_max,"
        "token_precision_mean");

  CHECK(std::filesystem::exists(dir / "worst0_bucket0.pgm"));
  CHECK(std::filesystem::exists(dir / "worst0_bucket0.txt"));
  CHECK(std::filesystem::exists(dir / "worst1_bucket0.pgm"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("default bucket ladders") {
  auto ratio = default_ratio_buckets();
  REQUIRE(ratio.size() == 12);
  CHECK(ratio.front().mode == ResolutionMode::Tiny);
  CHECK(ratio.front().n_tokens == 128);
  CHECK(ratio[8].n_tokens == 1004);  // ~15.7x on 64 vision tokens
  CHECK(ratio.back().mode == ResolutionMode::Small);

  auto sweep = default_mode_sweep();
  REQUIRE(sweep.size() == 9);
  CHECK(sweep[0].mode == ResolutionMode::Tiny);
  CHECK(sweep[8].mode == ResolutionMode::Base);
  CHECK(sweep[8].n_tokens == 760);
}

TEST_CASE("model decoder round-trips through an untrained model") {
  Rng rng(5);
  nn::ParamStore<float> ps;
  EncoderConfig ec;
  ec.d_window = 16;
  ec.d_global = 32;
  ec.d_latent = 24;
  ec.n_window_layers = 1;
  ec.n_global_layers = 1;
  ec.n_heads_window = 2;
  ec.n_heads_global = 2;
  ec.pos_global_side = 8;
  DecoderConfig dc;
  dc.d_model = 32;
  dc.n_layers = 1;
  dc.n_heads = 2;
  dc.n_routed_experts = 4;
  dc.expert_hidden = 32;
  dc.shared_expert_hidden = 32;
  dc.d_latent = 24;
  Encoder<float> enc(ps, ec, rng);
  Decoder<float> dec(ps, dc, rng);

  StudyConfig cfg;
  cfg.docs_per_bucket = 1;
  cfg.buckets = {{ResolutionMode::Tiny, 64}};
  StudyResult res = run_compression_study(cfg, model_decoder(enc, dec));
  REQUIRE(res.records.size() == 1);
  // untrained: mostly id 0 until the cap; precision must sit in range
  CHECK(res.records[0].precision >= 0.0);
  CHECK(res.records[0].precision <= 1.0);
  CHECK(res.records[0].pred_len >= 0);
}
