// SPDX-License-Identifier: Apache-2.0
#include "occ/textcodec.hpp"

#include <array>

#include "occ/common.hpp"

namespace occ {

TokenSeq tokenize(const std::string& text) {
  TokenSeq seq;
  seq.ids.reserve(text.size());
  for (char c : text) {
    if (!is_supported_char(c))
      fail("tokenize: unsupported character (codepoint " +
           std::to_string(static_cast<int>(static_cast<unsigned char>(c))) + ")");
    seq.ids.push_back(static_cast<int32_t>(static_cast<unsigned char>(c)));
  }
  return seq;
}

std::string detokenize(const TokenSeq& seq) {
  check(seq.codec_id == kCodecId, "detokenize: unknown codec_id '" + seq.codec_id + "'");
  std::string out;
  out.reserve(seq.ids.size());
  for (int32_t id : seq.ids) {
    check(id >= 0 && id < kVocabSize && is_supported_char(static_cast<char>(id)),
          "detokenize: invalid id " + std::to_string(id));
    out.push_back(static_cast<char>(id));
  }
  return out;
}

namespace {

const std::array<std::vector<std::string>, 11>& word_buckets() {
  static const std::array<std::vector<std::string>, 11> kBuckets = {{
      {},  // length 0 unused
      {"a", "i", "o", "x", "k", "m", "n", "t"},
      {"at", "in", "on", "of", "to", "it", "as", "we", "he", "be"},
      {"the", "and", "for", "not", "you", "all", "can", "her", "one", "out"},
      {"that", "with", "have", "this", "from", "they", "word", "what", "were", "when"},
      {"which", "there", "their", "about", "would", "these", "other", "words", "could", "write"},
      {"number", "people", "letter", "mother", "answer", "should", "before", "little", "follow",
       "wanted"},
      {"through", "between", "thought", "nothing", "picture", "country", "example", "however",
       "general", "against"},
      {"together", "children", "question", "continue", "possible", "remember", "mountain",
       "building", "interest", "sentence"},
      {"different", "important", "following", "sometimes", "something", "education", "community",
       "knowledge", "president", "structure"},
      {"everything", "understand", "themselves", "foundation", "government", "experience",
       "particular", "television", "department", "production"},
  }};
  return kBuckets;
}

std::string pick_word(Rng& rng, int len, const std::string& vocabulary) {
  const auto& bucket = word_buckets()[static_cast<size_t>(len)];
  std::string w = bucket[rng.uniform_index(bucket.size())];
  if (vocabulary == "mixed") {
    double r = rng.uniform();
    if (r < 0.10) {
      for (char& c : w) c = static_cast<char>('0' + rng.uniform_index(10));
    } else if (r < 0.30) {
      w[0] = static_cast<char>(w[0] - 'a' + 'A');
    }
  }
  return w;
}

void check_vocabulary(const std::string& vocabulary) {
  check(vocabulary == "lower" || vocabulary == "mixed",
        "unknown vocabulary '" + vocabulary + "'");
}

}  // namespace

std::string gen_exact_line(Rng& rng, int len, const std::string& vocabulary) {
  check(len >= 1, "gen_exact_line: len must be >= 1");
  check_vocabulary(vocabulary);
  std::string line;
  line.reserve(static_cast<size_t>(len));
  int pos = 0;
  while (pos < len) {
    if (pos > 0) {
      line.push_back(' ');
      ++pos;
    }
    int remaining = len - pos;
    int wmax = std::min(10, remaining);
    int w = 1 + static_cast<int>(rng.uniform_index(static_cast<size_t>(wmax)));
    // A word must either finish the line or leave room for " x".
    if (remaining - w == 1) w = (w + 1 <= wmax) ? w + 1 : w - 1;
    line += pick_word(rng, w, vocabulary);
    pos += w;
  }
  return line;
}

std::string gen_document(const CorpusSpec& spec) {
  check(spec.target_tokens >= 1, "gen_document: target_tokens must be >= 1");
  check(spec.line_min >= 1 && spec.line_max >= spec.line_min,
        "gen_document: bad line_length_range");
  check_vocabulary(spec.vocabulary);
  Rng rng(spec.seed);
  std::string doc;
  doc.reserve(static_cast<size_t>(spec.target_tokens));
  int rem = spec.target_tokens;
  bool first = true;
  while (rem > 0) {
    if (!first) {
      doc.push_back('\n');
      --rem;
    }
    int len = spec.line_min + static_cast<int>(rng.uniform_index(
                                  static_cast<size_t>(spec.line_max - spec.line_min + 1)));
    if (len >= rem - 1) len = rem;  // absorb the tail; never leave a lone newline
    doc += gen_exact_line(rng, len, spec.vocabulary);
    rem -= len;
    first = false;
  }
  return doc;
}

}  // namespace occ
