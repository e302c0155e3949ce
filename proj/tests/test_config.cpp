// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "occ/config.hpp"

using namespace occ;

TEST_CASE("empty object yields defaults") {
  GlobalConfig cfg = parse_config("{}");
  CHECK(cfg.seed == 42);
  CHECK(cfg.corpus.target_tokens == 650);
  CHECK(cfg.page.width_px == 1024);
  CHECK(cfg.encoder.d_latent == 128);
  CHECK(cfg.decoder.vocab == kDecoderVocab);
  CHECK(cfg.train.steps == 2000);
  CHECK(cfg.train.seed == 42);
  CHECK(cfg.train.curriculum.empty());
  CHECK(cfg.eval.decoder == "model");
  CHECK(cfg.decay.stages.size() == 3);
  CHECK(cfg.decay.stages[2].factor == 2);
}

TEST_CASE("serialize then parse is a fixed point") {
  GlobalConfig cfg = parse_config("{}");
  std::string s1 = serialize_config(cfg);
  std::string s2 = serialize_config(parse_config(s1));
  CHECK(s1 == s2);
  CHECK(s1.find("\"seed\": 42") != std::string::npos);
}

TEST_CASE("line comments are accepted") {
  GlobalConfig cfg = parse_config(
      "{\n"
      "  // override the run seed\n"
      "  \"seed\": 7,\n"
      "  \"train\": { \"steps\": 12 /* short run */ }\n"
      "}\n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.train.seed == 7);
  CHECK(cfg.train.steps == 12);
  CHECK(cfg.train.batch == 8);
}

TEST_CASE("unknown keys are rejected with their location") {
  CHECK_THROWS_WITH(parse_config("{\"train\": {\"lr2\": 0.1}}"),
                    doctest::Contains("/train/lr2"));
  CHECK_THROWS_WITH(parse_config("{\"speed\": 1}"), doctest::Contains("/speed"));
  CHECK_THROWS_WITH(parse_config("{\"decay\": {\"stages\": [{\"age_min\": 0, \"mode\": \"Tiny\", "
                                 "\"factr\": 1}]}}"),
                    doctest::Contains("/decay/stages/0/factr"));
  CHECK_THROWS_WITH(parse_config("{\"train\": {\"curriculum\": [{\"mode\": \"Tiny\", "
                                 "\"n_tokens\": 8, \"w\": 1.0}]}}"),
                    doctest::Contains("/train/curriculum/0/w"));
}

TEST_CASE("malformed input is reported") {
  CHECK_THROWS(parse_config("{\"seed\": }"));
  CHECK_THROWS(parse_config("[1, 2]"));
  CHECK_THROWS(parse_config("{\"seed\": \"abc\"}"));
  CHECK_THROWS(parse_config("{\"train\": {\"schedule\": 3}}"));
  CHECK_THROWS(parse_config("{\"decay\": {\"stages\": [{\"age_min\": 0, \"mode\": \"warp\", "
                            "\"factor\": 1}]}}"));
}

TEST_CASE("nested overrides merge onto defaults") {
  GlobalConfig cfg = parse_config(
      "{\"seed\": 3,"
      " \"train\": {\"curriculum\": ["
      "   {\"mode\": \"Tiny\", \"n_tokens\": 96, \"weight\": 2.0},"
      "   {\"mode\": \"Gundam\", \"n_tokens\": 900, \"weight\": 0.5}]},"
      " \"decay\": {\"stages\": [{\"age_min\": 1, \"mode\": \"Small\", \"factor\": 5}],"
      "             \"keep_text_rounds\": 1},"
      " \"eval\": {\"decoder\": \"echo\", \"checkpoint\": \"run/ckpt_final.bin\"}}");
  CHECK(cfg.train.curriculum.size() == 2);
  CHECK(cfg.train.curriculum[0].mode == ResolutionMode::Tiny);
  CHECK(cfg.train.curriculum[1].mode == ResolutionMode::Gundam);
  CHECK(cfg.train.curriculum[1].weight == 0.5);
  CHECK(cfg.train.seed == 3);
  CHECK(cfg.decay.stages.size() == 1);
  CHECK(cfg.decay.stages[0].mode == ResolutionMode::Small);
  CHECK(cfg.decay.stages[0].factor == 5);
  CHECK(cfg.decay.keep_text_rounds == 1);
  CHECK(cfg.decay.rounds == 10);
  CHECK(cfg.eval.decoder == "echo");
  CHECK(cfg.eval.checkpoint == "run/ckpt_final.bin");
  CHECK(cfg.eval.docs_per_bucket == 32);

  std::string s1 = serialize_config(cfg);
  GlobalConfig back = parse_config(s1);
  CHECK(serialize_config(back) == s1);
  CHECK(back.train.curriculum.size() == 2);
  CHECK(back.decay.stages[0].factor == 5);
}

TEST_CASE("load_config reads a file") {
  std::string path = "cfg_roundtrip_test.json";
  {
    std::ofstream f(path);
    f << "// trial config\n{\"seed\": 11}\n";
  }
  GlobalConfig cfg = load_config(path);
  CHECK(cfg.seed == 11);
  std::remove(path.c_str());
  CHECK_THROWS_WITH(load_config("no_such_config.json"), doctest::Contains("cannot open"));
}
