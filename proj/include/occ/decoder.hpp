// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "occ/encoder.hpp"
#include "occ/nn/layers.hpp"
#include "occ/nn/moe.hpp"

namespace occ {

// Token ids 0..127 belong to the text codec; the decoder appends four
// control ids on top.
inline constexpr int kTokBosImg = 128;
inline constexpr int kTokEosImg = 129;
inline constexpr int kTokBosText = 130;
inline constexpr int kTokEos = 131;
inline constexpr int kFirstControlToken = 128;
inline constexpr int kDecoderVocab = 132;

struct DecoderConfig {
  int d_model = 128;
  int n_layers = 4;
  int n_heads = 8;
  int n_routed_experts = 8;
  int n_shared_experts = 1;
  int top_k = 2;
  int expert_hidden = 128;
  int shared_expert_hidden = 256;
  int vocab = kDecoderVocab;
  int max_seq = 1152;
  int d_latent = 128;

  void validate() const {
    check(d_model > 0 && d_model % n_heads == 0, "decoder: d_model not divisible by heads");
    check(n_layers >= 1, "decoder: need at least one layer");
    check(top_k >= 1 && top_k <= n_routed_experts, "decoder: top_k out of range");
    check(n_shared_experts >= 0, "decoder: bad shared expert count");
    check(vocab >= kDecoderVocab, "decoder: vocab must cover the control tokens");
    check(max_seq >= 8, "decoder: max_seq too small");
    check(d_latent > 0 && expert_hidden > 0 && shared_expert_hidden > 0,
          "decoder: widths must be positive");
  }
};

// Row map for the conditioning prefix:
//   [BOS_IMG] view0 latents [SEP] view1 latents ... [EOS_IMG] [BOS_TEXT]
// SEP is a learned d_model vector, not a vocabulary token.
struct PrefixLayout {
  int n_views = 0;
  int n_latents = 0;
  int prefix_len = 0;
  std::vector<int> latent_rows;
  std::vector<int> sep_rows;
  std::vector<std::pair<int, int>> emb_rows;  // (row, token id)
};

template <typename T>
struct DecBlockCache {
  nn::LayerNormCache<T> ln1, ln2;
  nn::MhaCache<T> attn;
  nn::MoECache<T> moe;
};

// Pre-norm block with a mixture-of-experts feed-forward.
template <typename T>
struct DecBlock {
  nn::LayerNorm<T> ln1, ln2;
  nn::MultiHeadAttn<T> attn;
  nn::MoELayer<T> moe;

  DecBlock(nn::ParamStore<T>& ps, const std::string& prefix, const DecoderConfig& cfg, Rng& rng)
      : ln1(ps, prefix + ".ln1", cfg.d_model),
        ln2(ps, prefix + ".ln2", cfg.d_model),
        attn(ps, prefix + ".attn", cfg.d_model, cfg.n_heads, rng),
        moe(ps, prefix + ".moe", cfg.d_model, cfg.n_routed_experts, cfg.n_shared_experts,
            cfg.top_k, cfg.expert_hidden, cfg.shared_expert_hidden, rng) {}

  nn::Mat<T> fwd(const nn::Mat<T>& x, const nn::AttnMask& mask, DecBlockCache<T>& c) const {
    nn::Mat<T> h = x + attn.fwd(ln1.fwd(x, c.ln1), mask, c.attn);
    return h + moe.fwd(ln2.fwd(h, c.ln2), c.moe);
  }

  nn::Mat<T> bwd(const nn::AttnMask& mask, const DecBlockCache<T>& c, const nn::Mat<T>& dy) const {
    nn::Mat<T> dh = dy + ln2.bwd(c.ln2, moe.bwd(c.moe, dy));
    return dh + ln1.bwd(c.ln1, attn.bwd(mask, c.attn, dh));
  }
};

template <typename T>
struct DecTfCache {
  PrefixLayout layout;
  nn::Mat<T> z_in;  // latent input, kept for the projection backward
  nn::AttnMask mask;
  std::vector<DecBlockCache<T>> blocks;
  nn::LayerNormCache<T> lnf;
  nn::Mat<T> lnf_out;
  std::vector<std::pair<int, int>> all_emb_rows;  // prefix controls + shifted text
  int seq_len = 0;
  int n_targets = 0;
};

enum class StopReason { eos, max_len };

struct GenResult {
  std::vector<int> ids;  // text tokens only; the terminating control id is dropped
  StopReason stop_reason = StopReason::max_len;
};

struct ParamCounts {
  int64_t total = 0;
  int64_t active = 0;  // per-token cost: total minus the routed experts left idle
};

template <typename T>
class Decoder {
 public:
  Decoder(nn::ParamStore<T>& ps, const DecoderConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg.validate();
    emb_ = &ps.add("dec.emb", cfg.vocab, cfg.d_model);
    nn::init_normal(*emb_, rng, 0.02);
    pos_ = &ps.add("dec.pos", cfg.max_seq, cfg.d_model);
    nn::init_normal(*pos_, rng, 0.02);
    sep_ = &ps.add("dec.sep", 1, cfg.d_model);
    nn::init_normal(*sep_, rng, 0.02);
    latent_proj_ = nn::Linear<T>(ps, "dec.latent_proj", cfg.d_latent, cfg.d_model, rng);
    blocks_.reserve(static_cast<size_t>(cfg.n_layers));
    for (int i = 0; i < cfg.n_layers; ++i)
      blocks_.emplace_back(ps, "dec.blk" + std::to_string(i), cfg, rng);
    ln_f_ = nn::LayerNorm<T>(ps, "dec.ln_f", cfg.d_model);
    head_ = nn::Linear<T>(ps, "dec.head", cfg.d_model, cfg.vocab, rng, /*zero_init=*/true);
  }

  const DecoderConfig& config() const { return cfg_; }

  static PrefixLayout prefix_layout(const LatentSeqT<T>& z) {
    check(!z.grids.empty(), "decoder: latent sequence has no views");
    int64_t total = 0;
    for (auto [h, w] : z.grids) {
      check(h >= 1 && w >= 1, "decoder: bad latent grid");
      total += static_cast<int64_t>(h) * w;
    }
    check(total == z.n && z.vectors.rows() == z.n, "decoder: latent count mismatch");
    PrefixLayout L;
    L.n_views = static_cast<int>(z.grids.size());
    L.n_latents = static_cast<int>(z.n);
    L.emb_rows.push_back({0, kTokBosImg});
    int row = 1;
    int li = 0;
    for (int v = 0; v < L.n_views; ++v) {
      if (v > 0) L.sep_rows.push_back(row++);
      int cnt = z.grids[static_cast<size_t>(v)].first * z.grids[static_cast<size_t>(v)].second;
      for (int i = 0; i < cnt; ++i, ++li) L.latent_rows.push_back(row++);
    }
    (void)li;
    L.emb_rows.push_back({row++, kTokEosImg});
    L.emb_rows.push_back({row++, kTokBosText});
    L.prefix_len = row;
    return L;
  }

  /// Teacher-forced pass. `target` is the text token sequence with the EOS id
  /// already appended by the caller; returns one probability row per target
  /// position. Row t is the model's distribution for target[t].
  nn::Mat<T> forward_teacher_forced(const LatentSeqT<T>& z, const std::vector<int>& target,
                                    DecTfCache<T>* cache) const {
    check(!target.empty(), "decoder: empty target");
    for (int id : target) check(id >= 0 && id < cfg_.vocab, "decoder: target id out of range");
    PrefixLayout L = prefix_layout(z);
    int m = static_cast<int>(target.size());
    int S = L.prefix_len + m - 1;
    check(S <= cfg_.max_seq, "decoder: sequence exceeds max_seq");

    std::vector<std::pair<int, int>> emb_rows = L.emb_rows;
    for (int t = 0; t + 1 < m; ++t) emb_rows.push_back({L.prefix_len + t, target[static_cast<size_t>(t)]});

    nn::Mat<T> x = assemble(z, L, emb_rows, S);
    nn::AttnMask mask = nn::AttnMask::prefix_lm(L.prefix_len, S);

    DecTfCache<T> local;
    DecTfCache<T>& c = cache ? *cache : local;
    c.layout = L;
    c.z_in = z.vectors;
    c.mask = mask;
    c.all_emb_rows = std::move(emb_rows);
    c.seq_len = S;
    c.n_targets = m;
    c.blocks.assign(blocks_.size(), {});
    for (size_t i = 0; i < blocks_.size(); ++i) x = blocks_[i].fwd(x, mask, c.blocks[i]);

    nn::Mat<T> h_pred = x.middleRows(L.prefix_len - 1, m);
    c.lnf_out = ln_f_.fwd(h_pred, c.lnf);
    nn::Mat<T> probs = head_.fwd(c.lnf_out);
    nn::softmax_rows(probs);
    return probs;
  }

  /// Backward for the teacher-forced pass. `dlogits` has one row per target
  /// position (gradient w.r.t. pre-softmax logits). Accumulates parameter
  /// grads and returns the gradient w.r.t. the latent vectors.
  nn::Mat<T> bwd_tf(const DecTfCache<T>& c, const nn::Mat<T>& dlogits) const {
    check(dlogits.rows() == c.n_targets && dlogits.cols() == cfg_.vocab,
          "decoder: dlogits shape mismatch");
    nn::Mat<T> dh_pred = ln_f_.bwd(c.lnf, head_.bwd(c.lnf_out, dlogits));
    nn::Mat<T> dx = nn::Mat<T>::Zero(c.seq_len, cfg_.d_model);
    dx.middleRows(c.layout.prefix_len - 1, c.n_targets) = dh_pred;
    for (size_t i = blocks_.size(); i-- > 0;) dx = blocks_[i].bwd(c.mask, c.blocks[i], dx);

    pos_->g.topRows(c.seq_len) += dx;
    for (auto [row, id] : c.all_emb_rows) emb_->g.row(id) += dx.row(row);
    for (int row : c.layout.sep_rows) sep_->g.row(0) += dx.row(row);
    nn::Mat<T> dproj(c.layout.n_latents, cfg_.d_model);
    for (int i = 0; i < c.layout.n_latents; ++i)
      dproj.row(i) = dx.row(c.layout.latent_rows[static_cast<size_t>(i)]);
    return latent_proj_.bwd(c.z_in, dproj);
  }

  /// Greedy decode. Emits until a control id (>= 128) is produced or caps are
  /// hit; the terminating id itself is not returned.
  GenResult generate_greedy(const LatentSeqT<T>& z, int max_new) const {
    GenResult out;
    if (max_new <= 0) return out;
    PrefixLayout L = prefix_layout(z);
    check(L.prefix_len < cfg_.max_seq, "decoder: prefix alone exceeds max_seq");

    nn::Mat<T> x = assemble(z, L, L.emb_rows, L.prefix_len);
    nn::AttnMask mask = nn::AttnMask::full(L.prefix_len);
    std::vector<nn::Mat<T>> K(blocks_.size()), V(blocks_.size());
    for (size_t i = 0; i < blocks_.size(); ++i) {
      DecBlockCache<T> c;
      x = blocks_[i].fwd(x, mask, c);
      K[i] = c.attn.k;
      V[i] = c.attn.v;
    }

    int id = predict(x.row(L.prefix_len - 1));
    while (true) {
      if (id >= kFirstControlToken) {
        out.stop_reason = StopReason::eos;
        return out;
      }
      out.ids.push_back(id);
      if (static_cast<int>(out.ids.size()) >= max_new) return out;  // max_len
      int row = L.prefix_len - 1 + static_cast<int>(out.ids.size());
      if (row >= cfg_.max_seq) return out;  // max_len
      nn::Mat<T> h = emb_->v.row(id) + pos_->v.row(row);
      for (size_t i = 0; i < blocks_.size(); ++i) {
        nn::LayerNormCache<T> lc1, lc2;
        nn::MoECache<T> mc;
        nn::Mat<T> a = h + blocks_[i].attn.step(blocks_[i].ln1.fwd(h, lc1), K[i], V[i]);
        h = a + blocks_[i].moe.fwd(blocks_[i].ln2.fwd(a, lc2), mc);
      }
      id = predict(h);
    }
  }

  ParamCounts count_params(const nn::ParamStore<T>& ps) const {
    ParamCounts pc;
    pc.total = ps.param_count();
    int64_t per_expert =
        2LL * cfg_.d_model * cfg_.expert_hidden + cfg_.expert_hidden + cfg_.d_model;
    pc.active = pc.total -
                static_cast<int64_t>(cfg_.n_layers) * (cfg_.n_routed_experts - cfg_.top_k) *
                    per_expert;
    return pc;
  }

 private:
  nn::Mat<T> assemble(const LatentSeqT<T>& z, const PrefixLayout& L,
                      const std::vector<std::pair<int, int>>& emb_rows, int S) const {
    nn::Mat<T> x(S, cfg_.d_model);
    check(z.vectors.cols() == cfg_.d_latent, "decoder: latent width mismatch");
    nn::Mat<T> zp = latent_proj_.fwd(z.vectors);
    for (int i = 0; i < L.n_latents; ++i)
      x.row(L.latent_rows[static_cast<size_t>(i)]) = zp.row(i);
    for (int row : L.sep_rows) x.row(row) = sep_->v.row(0);
    for (auto [row, id] : emb_rows) x.row(row) = emb_->v.row(id);
    x += pos_->v.topRows(S);
    return x;
  }

  int predict(const nn::Mat<T>& h_row) const {
    nn::LayerNormCache<T> lc;
    nn::Mat<T> logits = head_.fwd(ln_f_.fwd(h_row, lc));
    int best = 0;
    for (int j = 1; j < cfg_.vocab; ++j)
      if (logits(0, j) > logits(0, best)) best = j;
    return best;
  }

  DecoderConfig cfg_;
  nn::Tensor<T>* emb_ = nullptr;
  nn::Tensor<T>* pos_ = nullptr;
  nn::Tensor<T>* sep_ = nullptr;
  nn::Linear<T> latent_proj_;
  std::vector<DecBlock<T>> blocks_;
  nn::LayerNorm<T> ln_f_;
  nn::Linear<T> head_;
};

}  // namespace occ
