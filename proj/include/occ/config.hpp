// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "occ/decay.hpp"
#include "occ/decoder.hpp"
#include "occ/encoder.hpp"
#include "occ/raster.hpp"
#include "occ/train.hpp"

namespace occ {

struct CorpusConfig {
  int target_tokens = 650;
  int line_min = 8;
  int line_max = 72;
  std::string vocabulary = "lower";
};

struct EvalConfig {
  int docs_per_bucket = 32;
  std::string vocabulary = "lower";
  std::string buckets = "ratio";  // ratio | modes
  std::string decoder = "model";  // model | echo | empty
  std::string checkpoint;         // required when decoder == model
  int dump_worst = 0;
};

struct DecayConfig {
  int keep_text_rounds = 2;
  bool discard_terminal = false;
  std::vector<DecayStage> stages = {{2, ResolutionMode::Base, 1},
                                    {6, ResolutionMode::Tiny, 1},
                                    {10, ResolutionMode::Tiny, 2}};
  std::string curve_csv;  // evalharness summary.csv; empty skips recall estimates
  int rounds = 10;
  int64_t tokens_per_round = 1000;
};

// Whole-pipeline configuration. JSON on disk (// comments allowed); unknown
// keys are rejected with their location; parse -> serialize -> parse is a
// fixed point.
struct GlobalConfig {
  uint64_t seed = 42;
  CorpusConfig corpus;
  PageSpec page;
  EncoderConfig encoder;
  DecoderConfig decoder;
  TrainConfig train;
  EvalConfig eval;
  DecayConfig decay;
};

GlobalConfig parse_config(const std::string& text);
GlobalConfig load_config(const std::string& path);
std::string serialize_config(const GlobalConfig& cfg);

}  // namespace occ
