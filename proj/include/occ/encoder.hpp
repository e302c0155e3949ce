// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "occ/modes.hpp"
#include "occ/nn/layers.hpp"
#include "occ/raster.hpp"

namespace occ {

struct EncoderConfig {
  int patch = 16;
  int d_window = 64;
  int d_global = 128;
  int d_latent = 128;
  int window_size = 8;
  int n_window_layers = 2;
  int n_global_layers = 2;
  int n_heads_window = 4;
  int n_heads_global = 8;
  int pos_patch_side = 32;
  int pos_global_side = 16;
  int max_global_tokens = 1024;
};

inline void validate(const EncoderConfig& c) {
  check(c.patch == 16, "EncoderConfig: patch size is fixed at 16");
  check(c.d_window > 0 && c.d_global > 0 && c.d_latent > 0, "EncoderConfig: bad widths");
  check(c.d_window % c.n_heads_window == 0, "EncoderConfig: d_window not divisible by heads");
  check(c.d_global % c.n_heads_global == 0, "EncoderConfig: d_global not divisible by heads");
  check(c.window_size >= 1, "EncoderConfig: bad window_size");
  check(c.n_window_layers >= 1 && c.n_global_layers >= 1, "EncoderConfig: need layers");
  check(c.pos_patch_side >= 1 && c.pos_global_side >= 1, "EncoderConfig: bad pos table side");
}

template <typename T>
struct LatentSeqT {
  nn::Mat<T> vectors;                       // (n, d_latent)
  int n = 0;
  std::vector<std::pair<int, int>> grids;   // (h', w') per view, sum == n
};

using LatentSeq = LatentSeqT<float>;

template <typename T>
void check_finite(const LatentSeqT<T>& z) {
  check(z.vectors.allFinite(), "LatentSeq: non-finite values");
}

struct EncodeStats {
  int64_t patch_tokens = 0;       // summed over views
  int64_t compressed_tokens = 0;  // summed over views
  int peak_dense_attn = 0;        // longest sequence seen by global attention
  int n_views = 0;
};

template <typename T>
struct EncViewCache {
  int gh = 0, gw = 0;  // patch grid
  nn::Mat<T> patches;  // (gh*gw, 256) pixel blocks in [0,1]
  std::vector<int> perm;  // window-major index -> row-major index
  std::vector<nn::BlockCache<T>> win;
  nn::ConvCache<T> conv1c, conv2c;
  nn::Mat<T> conv1_pre;  // pre-GELU
  int ch = 0, cw = 0;    // compressed grid
  std::vector<nn::BlockCache<T>> glob;
  nn::LayerNormCache<T> lnf;
  nn::Mat<T> lnf_out;
};

template <typename T>
struct EncCache {
  std::vector<EncViewCache<T>> views;
};

// Patch embed -> windowed attention -> two stride-2 convs (16x token cut)
// -> dense global attention -> latent head. Weights are shared across views;
// a multi-view plan concatenates per-view latents tile-major, global last.
template <typename T>
class Encoder {
 public:
  Encoder(nn::ParamStore<T>& ps, const EncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
    validate(cfg);
    patch_proj_ = nn::Linear<T>(ps, "enc.patch", cfg.patch * cfg.patch, cfg.d_window, rng);
    pos_patch_ = nn::PosTable2D<T>(ps, "enc.pos_patch", cfg.pos_patch_side, cfg.pos_patch_side,
                                   cfg.d_window, rng);
    for (int i = 0; i < cfg.n_window_layers; ++i)
      win_blocks_.emplace_back(ps, "enc.win" + std::to_string(i), cfg.d_window,
                               cfg.n_heads_window, 4 * cfg.d_window, rng);
    conv1_ = nn::Conv3x3s2<T>(ps, "enc.conv1", cfg.d_window, cfg.d_global, rng);
    conv2_ = nn::Conv3x3s2<T>(ps, "enc.conv2", cfg.d_global, cfg.d_global, rng);
    pos_global_ = nn::PosTable2D<T>(ps, "enc.pos_global", cfg.pos_global_side,
                                    cfg.pos_global_side, cfg.d_global, rng);
    for (int i = 0; i < cfg.n_global_layers; ++i)
      glob_blocks_.emplace_back(ps, "enc.glob" + std::to_string(i), cfg.d_global,
                                cfg.n_heads_global, 4 * cfg.d_global, rng);
    ln_f_ = nn::LayerNorm<T>(ps, "enc.ln_f", cfg.d_global);
    latent_head_ = nn::Linear<T>(ps, "enc.latent", cfg.d_global, cfg.d_latent, rng);
  }

  const EncoderConfig& config() const { return cfg_; }

  /// Linear projection of 16x16 pixel blocks scaled to [0,1]; no positions.
  nn::Mat<T> patchify(const PageImage& img) const {
    nn::Mat<T> patches = extract_patches(img);
    return patch_proj_.fwd(patches);
  }

  LatentSeqT<T> encode(const std::vector<PageImage>& views, EncodeStats* stats,
                       EncCache<T>* cache) const {
    check(!views.empty(), "encode: no views");
    EncCache<T> local;
    EncCache<T>& c = cache ? *cache : local;
    c.views.assign(views.size(), {});
    LatentSeqT<T> z;
    std::vector<nn::Mat<T>> parts;
    for (size_t i = 0; i < views.size(); ++i) {
      parts.push_back(encode_view(views[i], c.views[i], stats));
      z.grids.emplace_back(c.views[i].ch, c.views[i].cw);
      z.n += c.views[i].ch * c.views[i].cw;
    }
    z.vectors.resize(z.n, cfg_.d_latent);
    Eigen::Index row = 0;
    for (const auto& p : parts) {
      z.vectors.middleRows(row, p.rows()) = p;
      row += p.rows();
    }
    if (stats) stats->n_views += static_cast<int>(views.size());
    return z;
  }

  /// Backprop through every view; dz rows follow the concatenation order.
  void bwd(const EncCache<T>& c, const nn::Mat<T>& dz) const {
    Eigen::Index row = 0;
    for (const auto& vc : c.views) {
      Eigen::Index m = static_cast<Eigen::Index>(vc.ch) * vc.cw;
      bwd_view(vc, dz.middleRows(row, m));
      row += m;
    }
    check(row == dz.rows(), "encoder bwd: gradient row count mismatch");
  }

 private:
  nn::Mat<T> extract_patches(const PageImage& img) const {
    check(img.width_px % 16 == 0 && img.height_px % 16 == 0,
          "patchify: image dims must be divisible by 16");
    int gw = img.width_px / 16, gh = img.height_px / 16;
    nn::Mat<T> patches(static_cast<Eigen::Index>(gh) * gw, 256);
    for (int py = 0; py < gh; ++py)
      for (int px = 0; px < gw; ++px) {
        Eigen::Index row = static_cast<Eigen::Index>(py) * gw + px;
        for (int dy = 0; dy < 16; ++dy)
          for (int dx = 0; dx < 16; ++dx)
            patches(row, dy * 16 + dx) = T(img.at(px * 16 + dx, py * 16 + dy)) / T(255);
      }
    return patches;
  }

  static std::vector<int> window_perm(int gh, int gw, int ws) {
    std::vector<int> perm;
    perm.reserve(static_cast<size_t>(gh) * gw);
    for (int wy = 0; wy < gh / ws; ++wy)
      for (int wx = 0; wx < gw / ws; ++wx)
        for (int iy = 0; iy < ws; ++iy)
          for (int ix = 0; ix < ws; ++ix)
            perm.push_back((wy * ws + iy) * gw + (wx * ws + ix));
    return perm;
  }

  nn::Mat<T> encode_view(const PageImage& img, EncViewCache<T>& c, EncodeStats* stats) const {
    c.gh = img.height_px / 16;
    c.gw = img.width_px / 16;
    c.patches = extract_patches(img);
    nn::Mat<T> x = patch_proj_.fwd(c.patches) + pos_patch_.fwd(c.gh, c.gw);
    if (stats) stats->patch_tokens += x.rows();

    int ws = cfg_.window_size;
    check(c.gh % ws == 0 && c.gw % ws == 0, "window stage: grid not divisible by window size");
    c.perm = window_perm(c.gh, c.gw, ws);
    nn::Mat<T> xw(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) xw.row(i) = x.row(c.perm[static_cast<size_t>(i)]);
    nn::AttnMask wmask;
    for (Eigen::Index s = 0; s < xw.rows(); s += ws * ws)
      wmask.groups.emplace_back(static_cast<int>(s), ws * ws);
    c.win.assign(win_blocks_.size(), {});
    for (size_t i = 0; i < win_blocks_.size(); ++i) xw = win_blocks_[i].fwd(xw, wmask, c.win[i]);
    nn::Mat<T> xr(xw.rows(), xw.cols());
    for (Eigen::Index i = 0; i < xw.rows(); ++i) xr.row(c.perm[static_cast<size_t>(i)]) = xw.row(i);

    check(c.gh >= 4 && c.gw >= 4, "compress16: grid smaller than 4x4");
    c.conv1_pre = conv1_.fwd(xr, c.gh, c.gw, c.conv1c);
    nn::Mat<T> a1 = c.conv1_pre.unaryExpr([](T v) { return nn::gelu(v); });
    nn::Mat<T> x2 = conv2_.fwd(a1, c.conv1c.out_h, c.conv1c.out_w, c.conv2c);
    c.ch = c.conv2c.out_h;
    c.cw = c.conv2c.out_w;
    if (stats) {
      stats->compressed_tokens += x2.rows();
      stats->peak_dense_attn = std::max(stats->peak_dense_attn, static_cast<int>(x2.rows()));
    }
    check(x2.rows() <= cfg_.max_global_tokens, "global stage: token count over maximum");

    nn::Mat<T> y = x2 + pos_global_.fwd(c.ch, c.cw);
    nn::AttnMask gmask = nn::AttnMask::full(static_cast<int>(y.rows()));
    c.glob.assign(glob_blocks_.size(), {});
    for (size_t i = 0; i < glob_blocks_.size(); ++i) y = glob_blocks_[i].fwd(y, gmask, c.glob[i]);
    c.lnf_out = ln_f_.fwd(y, c.lnf);
    return latent_head_.fwd(c.lnf_out);
  }

  void bwd_view(const EncViewCache<T>& c, const nn::Mat<T>& dz) const {
    nn::Mat<T> dy = ln_f_.bwd(c.lnf, latent_head_.bwd(c.lnf_out, dz));
    nn::AttnMask gmask = nn::AttnMask::full(static_cast<int>(dy.rows()));
    for (size_t i = glob_blocks_.size(); i-- > 0;)
      dy = glob_blocks_[i].bwd(gmask, c.glob[i], dy);
    pos_global_.bwd(c.ch, c.cw, dy);

    nn::Mat<T> da1 = conv2_.bwd(c.conv2c, dy);
    nn::Mat<T> dc1 =
        da1.cwiseProduct(c.conv1_pre.unaryExpr([](T v) { return nn::gelu_grad(v); }));
    nn::Mat<T> dxr = conv1_.bwd(c.conv1c, dc1);

    int ws = cfg_.window_size;
    nn::Mat<T> dxw(dxr.rows(), dxr.cols());
    for (Eigen::Index i = 0; i < dxr.rows(); ++i)
      dxw.row(i) = dxr.row(c.perm[static_cast<size_t>(i)]);
    nn::AttnMask wmask;
    for (Eigen::Index s = 0; s < dxw.rows(); s += ws * ws)
      wmask.groups.emplace_back(static_cast<int>(s), ws * ws);
    for (size_t i = win_blocks_.size(); i-- > 0;)
      dxw = win_blocks_[i].bwd(wmask, c.win[i], dxw);
    nn::Mat<T> dx(dxw.rows(), dxw.cols());
    for (Eigen::Index i = 0; i < dxw.rows(); ++i)
      dx.row(c.perm[static_cast<size_t>(i)]) = dxw.row(i);

    pos_patch_.bwd(c.gh, c.gw, dx);
    patch_proj_.bwd(c.patches, dx);
  }

  EncoderConfig cfg_;
  nn::Linear<T> patch_proj_;
  nn::PosTable2D<T> pos_patch_;
  std::vector<nn::Block<T>> win_blocks_;
  nn::Conv3x3s2<T> conv1_, conv2_;
  nn::PosTable2D<T> pos_global_;
  std::vector<nn::Block<T>> glob_blocks_;
  nn::LayerNorm<T> ln_f_;
  nn::Linear<T> latent_head_;
};

}  // namespace occ
