// SPDX-License-Identifier: Apache-2.0
#include "occ/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace occ {

void TrainConfig::validate() const {
  check(steps >= 1 && batch >= 1, "train: steps and batch must be positive");
  check(lr > 0 && warmup_steps >= 0, "train: bad lr or warmup");
  check(schedule == "cosine" || schedule == "constant", "train: unknown schedule " + schedule);
  check(min_lr_frac >= 0 && min_lr_frac <= 1, "train: min_lr_frac out of range");
  check(length_jitter >= 0 && length_jitter < 1, "train: length_jitter out of range");
  check(vocabulary == "lower" || vocabulary == "mixed", "train: unknown vocabulary");
  check(log_every >= 1, "train: log_every must be positive");
  for (const auto& e : curriculum) {
    check(!is_dynamic(e.mode), "train: curriculum uses native modes only");
    check(e.n_tokens >= 8 && e.weight > 0, "train: bad curriculum entry");
  }
}

std::vector<CurriculumEntry> default_curriculum() {
  using M = ResolutionMode;
  return {
      {M::Tiny, 96, 3.0},   {M::Tiny, 160, 3.0},  {M::Tiny, 256, 3.0},
      {M::Tiny, 384, 2.5},  {M::Tiny, 512, 2.0},  {M::Tiny, 640, 1.5},
      {M::Tiny, 768, 1.0},  {M::Tiny, 896, 0.75}, {M::Tiny, 1004, 0.5},
      {M::Small, 250, 1.0}, {M::Small, 500, 0.75}, {M::Small, 800, 0.5},
  };
}

double lr_at(const TrainConfig& cfg, int step) {
  if (step < cfg.warmup_steps) return cfg.lr * (step + 1) / cfg.warmup_steps;
  if (cfg.schedule == "constant") return cfg.lr;
  int t = step - cfg.warmup_steps;
  int total = cfg.steps - cfg.warmup_steps;
  if (total <= 0) return cfg.lr;
  double frac =
      cfg.min_lr_frac + (1.0 - cfg.min_lr_frac) * 0.5 * (1.0 + std::cos(M_PI * t / total));
  return cfg.lr * frac;
}

int choose_glyph_scale(int len, const PageSpec& spec) {
  for (int s = 8; s >= 2; --s) {
    PageSpec t = spec;
    t.glyph_w = 8 * s;
    t.glyph_h = 16 * s;
    if (t.capacity() >= len) return s;
  }
  return 1;
}

Sample make_sample(uint64_t sample_seed, ResolutionMode mode, int n_tokens,
                   const std::string& vocabulary) {
  check(!is_dynamic(mode), "make_sample: native modes only");
  CorpusSpec cs;
  cs.seed = hash_combine(sample_seed, hash_str("corpus"));
  cs.target_tokens = n_tokens;
  cs.vocabulary = vocabulary;

  Sample s;
  s.text = gen_document(cs);
  TokenSeq toks = tokenize(s.text);
  s.target = toks.ids;
  s.target.push_back(kTokEos);

  int side = native_side(mode);
  PageSpec spec;
  spec.width_px = side;
  spec.height_px = side;
  int scale = choose_glyph_scale(static_cast<int>(s.text.size()), spec);
  spec.glyph_w = 8 * scale;
  spec.glyph_h = 16 * scale;
  std::vector<PageImage> pages = render(s.text, spec);
  check(pages.size() == 1, "make_sample: document does not fit one page");

  s.tiling = plan(side, side, mode);
  s.views = crop_tiles(pages[0], s.tiling);
  s.ratio = static_cast<double>(toks.ids.size()) / static_cast<double>(s.tiling.total_tokens);
  return s;
}

Trainer::Trainer(const TrainConfig& tc, const EncoderConfig& ec, const DecoderConfig& dc)
    : tc_(tc),
      ec_(ec),
      dc_(dc),
      init_rng_(tc.seed),
      enc_(ps_, ec, init_rng_),
      dec_(ps_, dc, init_rng_),
      opt_(ps_, nn::AdamW<float>::Config{0.9, 0.999, 1e-8, tc.weight_decay}) {
  tc_.validate();
  if (tc_.curriculum.empty()) tc_.curriculum = default_curriculum();
  check(ec.d_latent == dc.d_latent, "train: encoder/decoder latent width mismatch");
}

Sample Trainer::sample_for(int step, int index) const {
  uint64_t key;
  if (tc_.fixed_pool > 0) {
    int64_t idx = (static_cast<int64_t>(step) * tc_.batch + index) % tc_.fixed_pool;
    key = hash_combine(hash_u64(tc_.seed), static_cast<uint64_t>(idx));
  } else {
    key = hash_combine(hash_combine(hash_u64(tc_.seed), static_cast<uint64_t>(step)),
                       static_cast<uint64_t>(index));
  }
  Rng rng(key);
  double total_w = 0;
  for (const auto& e : tc_.curriculum) total_w += e.weight;
  double pick = rng.uniform() * total_w;
  const CurriculumEntry* chosen = &tc_.curriculum.back();
  for (const auto& e : tc_.curriculum) {
    pick -= e.weight;
    if (pick < 0) {
      chosen = &e;
      break;
    }
  }
  int n = chosen->n_tokens;
  if (tc_.length_jitter > 0) {
    double f = 1.0 + tc_.length_jitter * (2.0 * rng.uniform() - 1.0);
    n = std::max(8, static_cast<int>(std::lround(n * f)));
  }
  return make_sample(rng.u64(), chosen->mode, n, tc_.vocabulary);
}

StepStats Trainer::step_once(int step) {
  StepStats st;
  st.lr = lr_at(tc_, step);

  std::vector<Sample> batch;
  batch.reserve(static_cast<size_t>(tc_.batch));
  for (int i = 0; i < tc_.batch; ++i) {
    Sample s = sample_for(step, i);
    int prefix = 3 + s.tiling.total_tokens + static_cast<int>(s.views.size()) - 1;
    int seq = prefix + static_cast<int>(s.target.size()) - 1;
    if (seq > dc_.max_seq) {
      ++st.skipped;
      ++skipped_total_;
      continue;
    }
    st.tokens += static_cast<int64_t>(s.target.size());
    batch.push_back(std::move(s));
  }
  if (st.tokens == 0) return st;

  ps_.zero_grad();
  double loss_sum = 0;
  for (const Sample& s : batch) {
    EncCache<float> ec;
    LatentSeq z = enc_.encode(s.views, nullptr, &ec);
    DecTfCache<float> dcache;
    nn::Mat<float> probs = dec_.forward_teacher_forced(z, s.target, &dcache);
    nn::Mat<float> dlogits = probs / static_cast<float>(st.tokens);
    for (size_t t = 0; t < s.target.size(); ++t) {
      Eigen::Index row = static_cast<Eigen::Index>(t);
      loss_sum -= std::log(std::max(1e-12, static_cast<double>(probs(row, s.target[t]))));
      dlogits(row, s.target[t]) -= 1.0f / static_cast<float>(st.tokens);
    }
    nn::Mat<float> dz = dec_.bwd_tf(dcache, dlogits);
    enc_.bwd(ec, dz);
  }
  st.loss = loss_sum / static_cast<double>(st.tokens);
  st.grad_norm = ps_.grad_norm();
  if (tc_.clip_norm > 0) ps_.clip_grad_norm(tc_.clip_norm);
  opt_.step(ps_, st.lr);
  tokens_seen_ += st.tokens;
  return st;
}

void Trainer::run(const std::function<void(int, const StepStats&)>& on_log) {
  std::string metrics_path = tc_.out_dir + "/metrics.csv";
  std::ofstream csv(metrics_path, std::ios::trunc);
  check(csv.is_open(), "train: cannot write " + metrics_path);
  csv << "step,loss,lr,grad_norm,tokens_seen\n";

  for (int step = 0; step < tc_.steps; ++step) {
    StepStats st = step_once(step);
    if (!std::isfinite(st.loss) || !std::isfinite(st.grad_norm)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "training diverged at step %d: loss=%g lr=%g grad_norm=%g", step, st.loss,
                    st.lr, st.grad_norm);
      fail(buf);
    }
    if (step % tc_.log_every == 0 || step == tc_.steps - 1) {
      char row[192];
      std::snprintf(row, sizeof(row), "%d,%.6f,%.8f,%.6f,%lld\n", step, st.loss, st.lr,
                    st.grad_norm, static_cast<long long>(tokens_seen_));
      csv << row;
      csv.flush();
      if (on_log) on_log(step, st);
    }
    if (tc_.ckpt_every > 0 && (step + 1) % tc_.ckpt_every == 0 && step + 1 < tc_.steps)
      save(tc_.out_dir + "/ckpt_step" + std::to_string(step + 1) + ".bin", step + 1, true);
  }
  save(tc_.out_dir + "/ckpt_final.bin", tc_.steps, true);
}

void Trainer::save(const std::string& path, int step, bool with_opt) const {
  TrainMeta meta{step, tc_.seed, tokens_seen_};
  save_checkpoint(path, ec_, dc_, ps_, meta, with_opt ? &opt_ : nullptr);
}

void Trainer::resume(const std::string& path) {
  CheckpointInfo info = peek_checkpoint(path);
  load_checkpoint(path, ps_, info.has_opt ? &opt_ : nullptr);
  tokens_seen_ = info.meta.tokens_seen;
}

}  // namespace occ
