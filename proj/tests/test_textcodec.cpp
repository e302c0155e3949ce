// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "occ/textcodec.hpp"

using namespace occ;

TEST_CASE("tokenize basic") {
  CHECK(tokenize("").ids.empty());
  TokenSeq ab = tokenize("ab");
  REQUIRE(ab.ids.size() == 2);
  CHECK(ab.ids[0] == 97);
  CHECK(ab.ids[1] == 98);
  CHECK(ab.codec_id == kCodecId);
  CHECK_THROWS_AS(tokenize(std::string("a\tb")), Error);
  CHECK_THROWS_AS(tokenize(std::string("caf\xc3\xa9")), Error);
}

TEST_CASE("detokenize basic") {
  TokenSeq q;
  q.ids = {104, 105};
  CHECK(detokenize(q) == "hi");
  q.ids = {104, 7};
  CHECK_THROWS_AS(detokenize(q), Error);
  q.ids = {104};
  q.codec_id = "other";
  CHECK_THROWS_AS(detokenize(q), Error);
}

TEST_CASE("round trip over random strings") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::string s;
    for (int i = 0; i < 200; ++i) {
      int r = static_cast<int>(rng.uniform_index(96));
      s.push_back(r == 95 ? '\n' : static_cast<char>(32 + r));
    }
    CHECK(detokenize(tokenize(s)) == s);
    TokenSeq q = tokenize(s);
    CHECK(tokenize(detokenize(q)).ids == q.ids);
    for (int32_t id : q.ids) CHECK(id < kVocabSize);
  }
}

TEST_CASE("gen_document token count and determinism") {
  CorpusSpec spec;
  spec.seed = 1;
  spec.target_tokens = 650;
  std::string doc = gen_document(spec);
  size_t n = tokenize(doc).ids.size();
  CHECK(n == 650);
  CHECK(n >= 637);
  CHECK(n <= 663);
  CHECK(gen_document(spec) == doc);

  CorpusSpec other = spec;
  other.seed = 2;
  CHECK(gen_document(other) != doc);
}

TEST_CASE("gen_document shape") {
  CorpusSpec spec;
  spec.seed = 7;
  spec.target_tokens = 400;
  spec.line_min = 20;
  spec.line_max = 40;
  std::string doc = gen_document(spec);
  CHECK(tokenize(doc).ids.size() == 400);
  CHECK(doc.front() != '\n');
  CHECK(doc.back() != '\n');
  CHECK(doc.find("  ") == std::string::npos);
  CHECK(doc.find(" \n") == std::string::npos);
  CHECK(doc.find("\n ") == std::string::npos);
  size_t start = 0;
  while (start <= doc.size()) {
    size_t end = doc.find('\n', start);
    if (end == std::string::npos) end = doc.size();
    size_t len = end - start;
    CHECK(len >= 1);
    CHECK(len <= 41);  // tail absorption may exceed line_max by one word
    start = end + 1;
  }
}

TEST_CASE("token count adds under concatenation") {
  CorpusSpec a, b;
  a.seed = 3;
  a.target_tokens = 100;
  b.seed = 4;
  b.target_tokens = 230;
  std::string da = gen_document(a), db = gen_document(b);
  CHECK(tokenize(da + db).ids.size() == tokenize(da).ids.size() + tokenize(db).ids.size());
}

TEST_CASE("gen_exact_line lengths") {
  Rng rng(5);
  for (int len = 1; len <= 120; ++len) {
    std::string line = gen_exact_line(rng, len, "lower");
    CHECK(line.size() == static_cast<size_t>(len));
    CHECK(line.front() != ' ');
    CHECK(line.back() != ' ');
    CHECK(line.find("  ") == std::string::npos);
  }
  for (int len = 1; len <= 60; ++len) {
    std::string line = gen_exact_line(rng, len, "mixed");
    CHECK(line.size() == static_cast<size_t>(len));
    CHECK(line.back() != ' ');
  }
  CHECK_THROWS_AS(gen_exact_line(rng, 0, "lower"), Error);
  CHECK_THROWS_AS(gen_exact_line(rng, 5, "upper"), Error);
}

TEST_CASE("mixed vocabulary stays in alphabet") {
  CorpusSpec spec;
  spec.seed = 11;
  spec.target_tokens = 2000;
  spec.vocabulary = "mixed";
  std::string doc = gen_document(spec);
  CHECK(detokenize(tokenize(doc)) == doc);
  bool has_upper = false, has_digit = false;
  for (char c : doc) {
    if (c >= 'A' && c <= 'Z') has_upper = true;
    if (c >= '0' && c <= '9') has_digit = true;
  }
  CHECK(has_upper);
  CHECK(has_digit);
}
