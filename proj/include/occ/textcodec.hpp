// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occ/rng.hpp"

namespace occ {

// Byte-identity codec over printable ASCII plus newline. Ids are raw
// codepoints, so the id space is [0, 128) even though only 96 characters
// are accepted.
inline constexpr const char* kCodecId = "ascii96.v1";
inline constexpr int kVocabSize = 128;

inline bool is_supported_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u == '\n' || (u >= 32 && u <= 126);
}

struct TokenSeq {
  std::vector<int32_t> ids;
  std::string codec_id = kCodecId;
};

TokenSeq tokenize(const std::string& text);
std::string detokenize(const TokenSeq& seq);

struct CorpusSpec {
  uint64_t seed = 0;
  int target_tokens = 0;
  int line_min = 8;
  int line_max = 72;
  std::string vocabulary = "lower";  // "lower" or "mixed"
};

/// Word-salad line of exactly `len` characters: words separated by single
/// spaces, no leading or trailing space.
std::string gen_exact_line(Rng& rng, int len, const std::string& vocabulary);

/// Deterministic synthetic document with exactly spec.target_tokens tokens.
std::string gen_document(const CorpusSpec& spec);

}  // namespace occ
