// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "occ/decoder.hpp"
#include "occ/encoder.hpp"
#include "occ/train.hpp"

namespace occ {

/// Levenshtein distance (unit insert/delete/substitute) over bytes.
int64_t edit_distance(const std::string& a, const std::string& b);

/// Collapses every run of whitespace to a single space and trims the ends.
/// Reading order matters for recall; exact line breaks do not.
std::string normalize_ws(const std::string& s);

/// Character-level decoding precision in [0, 1]:
/// 1 - ED(norm(gt), norm(pred)) / max(|norm(gt)|, |norm(pred)|, 1).
double decode_precision(const std::string& gt, const std::string& pred);

/// Same shape of score over codec token ids (auxiliary metric).
double token_precision(const std::string& gt, const std::string& pred);

struct DocDecode {
  std::string text;
  StopReason stop = StopReason::eos;
};

// A document decoder maps a rendered sample back to text. The real one wraps
// the encoder/decoder pair; tests substitute mocks.
using DocDecoder = std::function<DocDecode(const Sample&)>;

/// Perfect decoder (upper bound / harness plumbing tests).
DocDecoder echo_decoder();
/// Degenerate decoder that always returns the empty string.
DocDecoder empty_decoder();
/// Greedy decode through a trained model. Generation budget per doc is
/// n_text_tokens + 64, bounded by the decoder's sequence budget.
DocDecoder model_decoder(const Encoder<float>& enc, const Decoder<float>& dec);

struct EvalBucket {
  ResolutionMode mode = ResolutionMode::Tiny;
  int n_tokens = 128;
};

struct StudyConfig {
  uint64_t seed = 1234;
  int docs_per_bucket = 32;
  std::string vocabulary = "lower";
  std::vector<EvalBucket> buckets;
  std::string out_dir;  // when set: records.csv, summary.csv, worst-case dumps
  int dump_worst = 0;
};

struct EvalRecord {
  int bucket = 0;
  ResolutionMode mode = ResolutionMode::Tiny;
  uint64_t doc_seed = 0;
  int n_text_tokens = 0;
  int64_t vision_tokens = 0;
  double ratio = 0;
  double precision = 0;
  double token_prec = 0;
  int64_t edit_dist = 0;
  int pred_len = 0;
  StopReason stop = StopReason::eos;
};

struct BucketSummary {
  int bucket = 0;
  ResolutionMode mode = ResolutionMode::Tiny;
  int n_tokens = 0;
  int n_docs = 0;
  double ratio = 0;
  double precision_mean = 0;
  double precision_min = 0;
  double precision_max = 0;
  double token_prec_mean = 0;
};

struct StudyResult {
  std::vector<EvalRecord> records;
  std::vector<BucketSummary> buckets;
};

/// Precision-vs-compression-ratio ladder: Tiny pages from 2x up to the page
/// capacity (~15.7x), plus a Small-mode triplet.
std::vector<EvalBucket> default_ratio_buckets();

/// Fixed text densities rendered under three resolution modes.
std::vector<EvalBucket> default_mode_sweep();

/// Renders docs_per_bucket documents per bucket with per-doc seeds derived
/// from (seed, bucket, doc), decodes them, and scores precision. Writes CSVs
/// and worst-case page dumps when out_dir is set.
StudyResult run_compression_study(const StudyConfig& cfg, const DocDecoder& decode);

}  // namespace occ
