// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "occ/checkpoint.hpp"
#include "occ/decoder.hpp"
#include "occ/encoder.hpp"
#include "occ/raster.hpp"
#include "occ/textcodec.hpp"

namespace occ {

// One curriculum bucket: documents of roughly n_tokens rendered for `mode`,
// drawn with probability proportional to weight.
struct CurriculumEntry {
  ResolutionMode mode = ResolutionMode::Tiny;
  int n_tokens = 128;
  double weight = 1.0;
};

struct TrainConfig {
  uint64_t seed = 42;
  int steps = 2000;
  int batch = 8;
  double lr = 3e-4;
  int warmup_steps = 100;
  std::string schedule = "cosine";  // cosine | constant
  double min_lr_frac = 0.10;
  double clip_norm = 1.0;
  double weight_decay = 0.0;
  double length_jitter = 0.10;  // +/- fraction applied to n_tokens
  std::string vocabulary = "lower";
  int log_every = 10;
  int ckpt_every = 0;  // 0 disables periodic checkpoints
  int fixed_pool = 0;  // >0: cycle a fixed pool of this many samples (overfit runs)
  std::string out_dir = ".";
  std::vector<CurriculumEntry> curriculum;  // empty -> default mix

  void validate() const;
};

std::vector<CurriculumEntry> default_curriculum();

/// Piecewise schedule: linear warmup to lr, then cosine to min_lr_frac*lr at
/// the final step (or flat after warmup when schedule == "constant").
double lr_at(const TrainConfig& cfg, int step);

struct Sample {
  std::string text;
  std::vector<int> target;  // token ids with EOS appended
  std::vector<PageImage> views;
  TilingPlan tiling;
  double ratio = 0;  // text tokens / vision tokens
};

/// Renders one synthetic document at the mode's native resolution with the
/// largest glyph scale that fits. Fully determined by `sample_seed`.
Sample make_sample(uint64_t sample_seed, ResolutionMode mode, int n_tokens,
                   const std::string& vocabulary);

/// Largest glyph scale in [1, 8] whose page capacity holds `len` characters.
int choose_glyph_scale(int len, const PageSpec& spec);

struct StepStats {
  double loss = 0;
  double lr = 0;
  double grad_norm = 0;  // pre-clip
  int64_t tokens = 0;
  int skipped = 0;  // samples dropped for exceeding the decoder budget
};

class Trainer {
 public:
  Trainer(const TrainConfig& tc, const EncoderConfig& ec, const DecoderConfig& dc);

  /// One optimizer update; `step` indexes the schedule and the data stream.
  StepStats step_once(int step);

  /// Full loop: metrics CSV (step,loss,lr,grad_norm,tokens_seen), periodic
  /// checkpoints, final checkpoint. `on_log` (optional) observes every logged
  /// row. Aborts with Error on non-finite loss.
  void run(const std::function<void(int, const StepStats&)>& on_log = nullptr);

  Sample sample_for(int step, int index) const;

  nn::ParamStore<float>& params() { return ps_; }
  Encoder<float>& encoder() { return enc_; }
  Decoder<float>& decoder() { return dec_; }
  nn::AdamW<float>& opt() { return opt_; }
  const TrainConfig& config() const { return tc_; }
  int64_t tokens_seen() const { return tokens_seen_; }

  void save(const std::string& path, int step, bool with_opt) const;
  /// Restores weights (and optimizer state when present) from a checkpoint
  /// written by a trainer with identical configs.
  void resume(const std::string& path);

 private:
  TrainConfig tc_;
  EncoderConfig ec_;
  DecoderConfig dc_;
  Rng init_rng_;
  nn::ParamStore<float> ps_;
  Encoder<float> enc_;
  Decoder<float> dec_;
  nn::AdamW<float> opt_;
  int64_t tokens_seen_ = 0;
  int64_t skipped_total_ = 0;
};

}  // namespace occ
