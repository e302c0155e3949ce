// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <numeric>
#include <utility>

#include "occ/nn/core.hpp"

namespace occ::nn {

template <typename T>
struct Linear {
  Tensor<T>* W = nullptr;  // (in, out)
  Tensor<T>* b = nullptr;  // (1, out)

  Linear() = default;
  Linear(ParamStore<T>& ps, const std::string& prefix, int in, int out, Rng& rng,
         bool zero_init = false) {
    W = &ps.add(prefix + ".w", in, out);
    b = &ps.add(prefix + ".b", 1, out);
    if (!zero_init) init_normal(*W, rng, 1.0 / std::sqrt(static_cast<double>(in)));
  }

  Mat<T> fwd(const Mat<T>& x) const {
    Mat<T> y = x * W->v;
    y.rowwise() += b->v.row(0);
    return y;
  }

  /// Accumulates parameter grads; returns dL/dx.
  Mat<T> bwd(const Mat<T>& x, const Mat<T>& dy) const {
    W->g.noalias() += x.transpose() * dy;
    b->g.row(0) += dy.colwise().sum();
    return dy * W->v.transpose();
  }
};

template <typename T>
struct LayerNormCache {
  Mat<T> xhat;
  Mat<T> rstd;  // (n, 1)
};

template <typename T>
struct LayerNorm {
  Tensor<T>* gamma = nullptr;
  Tensor<T>* beta = nullptr;
  static constexpr double kEps = 1e-5;

  LayerNorm() = default;
  LayerNorm(ParamStore<T>& ps, const std::string& prefix, int d) {
    gamma = &ps.add(prefix + ".gamma", 1, d);
    beta = &ps.add(prefix + ".beta", 1, d);
    init_const(*gamma, T(1));
  }

  Mat<T> fwd(const Mat<T>& x, LayerNormCache<T>& c) const {
    Eigen::Index n = x.rows(), d = x.cols();
    c.xhat.resize(n, d);
    c.rstd.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      T mu = x.row(i).mean();
      T var = (x.row(i).array() - mu).square().mean();
      T rstd = T(1) / std::sqrt(var + T(kEps));
      c.rstd(i, 0) = rstd;
      c.xhat.row(i) = (x.row(i).array() - mu) * rstd;
    }
    Mat<T> y = c.xhat.array().rowwise() * gamma->v.row(0).array();
    y.rowwise() += beta->v.row(0);
    return y;
  }

  Mat<T> bwd(const LayerNormCache<T>& c, const Mat<T>& dy) const {
    Eigen::Index n = dy.rows(), d = dy.cols();
    gamma->g.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
    beta->g.row(0) += dy.colwise().sum();
    Mat<T> dx(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto dxhat = (dy.row(i).array() * gamma->v.row(0).array()).eval();
      T m1 = dxhat.mean();
      T m2 = (dxhat * c.xhat.row(i).array()).mean();
      dx.row(i) = (c.rstd(i, 0) * (dxhat - m1 - c.xhat.row(i).array() * m2)).matrix();
    }
    return dx;
  }
};

// Attention restriction: either block-diagonal groups (encoder windows /
// full attention as one group) or a per-query key limit (decoder prefix-LM).
struct AttnMask {
  std::vector<std::pair<int, int>> groups;  // (start, len)
  std::vector<int> row_limit;               // query i sees keys [0, row_limit[i])

  static AttnMask full(int n) { return {{{0, n}}, {}}; }
  static AttnMask prefix_lm(int prefix, int n) {
    AttnMask m;
    m.row_limit.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) m.row_limit[static_cast<size_t>(i)] = std::max(prefix, i + 1);
    return m;
  }
};

template <typename T>
struct MhaCache {
  Mat<T> x, q, k, v;
  Mat<T> attn_out;  // pre output-projection
};

template <typename T>
struct MultiHeadAttn {
  Linear<T> qkv, proj;
  int d = 0, n_heads = 0, dh = 0;

  MultiHeadAttn() = default;
  MultiHeadAttn(ParamStore<T>& ps, const std::string& prefix, int d_model, int heads, Rng& rng)
      : qkv(ps, prefix + ".qkv", d_model, 3 * d_model, rng),
        proj(ps, prefix + ".proj", d_model, d_model, rng),
        d(d_model),
        n_heads(heads),
        dh(d_model / heads) {
    check(d_model % heads == 0, "attention width not divisible by head count");
  }

  Mat<T> fwd(const Mat<T>& x, const AttnMask& mask, MhaCache<T>& c) const {
    Eigen::Index n = x.rows();
    c.x = x;
    Mat<T> fused = qkv.fwd(x);
    c.q = fused.leftCols(d);
    c.k = fused.middleCols(d, d);
    c.v = fused.rightCols(d);
    c.attn_out.resize(n, d);
    T scale = T(1) / std::sqrt(T(dh));
    for (int h = 0; h < n_heads; ++h) {
      auto Q = c.q.middleCols(h * dh, dh);
      auto K = c.k.middleCols(h * dh, dh);
      auto V = c.v.middleCols(h * dh, dh);
      auto O = c.attn_out.middleCols(h * dh, dh);
      if (!mask.groups.empty()) {
        for (auto [s, len] : mask.groups) {
          Mat<T> scores = Q.middleRows(s, len) * K.middleRows(s, len).transpose() * scale;
          softmax_rows(scores);
          O.middleRows(s, len) = scores * V.middleRows(s, len);
        }
      } else {
        Mat<T> probs = masked_probs(Q, K, mask, scale);
        O = probs * V;
      }
    }
    return proj.fwd(c.attn_out);
  }

  Mat<T> bwd(const AttnMask& mask, const MhaCache<T>& c, const Mat<T>& dy) const {
    Eigen::Index n = c.x.rows();
    Mat<T> d_attn_out = proj.bwd(c.attn_out, dy);
    Mat<T> dq = Mat<T>::Zero(n, d), dk = Mat<T>::Zero(n, d), dv = Mat<T>::Zero(n, d);
    T scale = T(1) / std::sqrt(T(dh));
    for (int h = 0; h < n_heads; ++h) {
      auto Q = c.q.middleCols(h * dh, dh);
      auto K = c.k.middleCols(h * dh, dh);
      auto V = c.v.middleCols(h * dh, dh);
      auto dO = d_attn_out.middleCols(h * dh, dh);
      auto dQ = dq.middleCols(h * dh, dh);
      auto dK = dk.middleCols(h * dh, dh);
      auto dV = dv.middleCols(h * dh, dh);
      if (!mask.groups.empty()) {
        for (auto [s, len] : mask.groups) {
          Mat<T> probs = Q.middleRows(s, len) * K.middleRows(s, len).transpose() * scale;
          softmax_rows(probs);
          Mat<T> dP = dO.middleRows(s, len) * V.middleRows(s, len).transpose();
          Mat<T> dS = softmax_bwd(probs, dP);
          dQ.middleRows(s, len) += dS * K.middleRows(s, len) * scale;
          dK.middleRows(s, len) += dS.transpose() * Q.middleRows(s, len) * scale;
          dV.middleRows(s, len) += probs.transpose() * dO.middleRows(s, len);
        }
      } else {
        Mat<T> probs = masked_probs(Q, K, mask, scale);
        Mat<T> dP = dO * V.transpose();
        Mat<T> dS = softmax_bwd(probs, dP);
        // zero out masked columns so no gradient leaks past the mask
        for (Eigen::Index i = 0; i < n; ++i)
          dS.row(i).rightCols(n - mask.row_limit[static_cast<size_t>(i)]).setZero();
        dQ += dS * K * scale;
        dK += dS.transpose() * Q * scale;
        dV += probs.transpose() * dO;
      }
    }
    Mat<T> dfused(n, 3 * d);
    dfused.leftCols(d) = dq;
    dfused.middleCols(d, d) = dk;
    dfused.rightCols(d) = dv;
    return qkv.bwd(c.x, dfused);
  }

  /// Incremental decode: appends K/V rows for one new token and attends over
  /// everything cached so far. x_new is (1, d).
  Mat<T> step(const Mat<T>& x_new, Mat<T>& K_cache, Mat<T>& V_cache) const {
    Mat<T> fused = qkv.fwd(x_new);
    Eigen::Index L = K_cache.rows();
    K_cache.conservativeResize(L + 1, d);
    V_cache.conservativeResize(L + 1, d);
    K_cache.row(L) = fused.middleCols(d, d);
    V_cache.row(L) = fused.rightCols(d);
    Mat<T> attn_out(1, d);
    T scale = T(1) / std::sqrt(T(dh));
    for (int h = 0; h < n_heads; ++h) {
      Mat<T> scores =
          fused.row(0).middleCols(h * dh, dh) * K_cache.middleCols(h * dh, dh).transpose() * scale;
      softmax_rows(scores);
      attn_out.middleCols(h * dh, dh) = scores * V_cache.middleCols(h * dh, dh);
    }
    return proj.fwd(attn_out);
  }

 private:
  template <typename QB, typename KB>
  Mat<T> masked_probs(const QB& Q, const KB& K, const AttnMask& mask, T scale) const {
    Eigen::Index n = Q.rows();
    Mat<T> scores = Q * K.transpose() * scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      int lim = mask.row_limit[static_cast<size_t>(i)];
      T mx = scores.row(i).leftCols(lim).maxCoeff();
      auto row = scores.row(i).leftCols(lim).array();
      scores.row(i).leftCols(lim) = (row - mx).exp().matrix();
      scores.row(i).leftCols(lim) /= scores.row(i).leftCols(lim).sum();
      if (lim < n) scores.row(i).rightCols(n - lim).setZero();
    }
    return scores;
  }

  static Mat<T> softmax_bwd(const Mat<T>& probs, const Mat<T>& dP) {
    Mat<T> dS = probs.cwiseProduct(dP);
    for (Eigen::Index i = 0; i < dS.rows(); ++i) {
      T s = dS.row(i).sum();
      dS.row(i) -= s * probs.row(i);
    }
    return dS;
  }
};

template <typename T>
struct MlpCache {
  Mat<T> x, h1;  // h1 pre-activation
};

template <typename T>
struct Mlp {
  Linear<T> fc1, fc2;

  Mlp() = default;
  Mlp(ParamStore<T>& ps, const std::string& prefix, int d, int hidden, Rng& rng)
      : fc1(ps, prefix + ".fc1", d, hidden, rng), fc2(ps, prefix + ".fc2", hidden, d, rng) {}

  Mat<T> fwd(const Mat<T>& x, MlpCache<T>& c) const {
    c.x = x;
    c.h1 = fc1.fwd(x);
    Mat<T> act = c.h1.unaryExpr([](T v) { return gelu(v); });
    return fc2.fwd(act);
  }

  Mat<T> bwd(const MlpCache<T>& c, const Mat<T>& dy) const {
    Mat<T> act = c.h1.unaryExpr([](T v) { return gelu(v); });
    Mat<T> dact = fc2.bwd(act, dy);
    Mat<T> dh1 = dact.cwiseProduct(c.h1.unaryExpr([](T v) { return gelu_grad(v); }));
    return fc1.bwd(c.x, dh1);
  }
};

template <typename T>
struct BlockCache {
  LayerNormCache<T> ln1, ln2;
  MhaCache<T> attn;
  MlpCache<T> mlp;
};

// Pre-norm transformer block with a dense MLP.
template <typename T>
struct Block {
  LayerNorm<T> ln1, ln2;
  MultiHeadAttn<T> attn;
  Mlp<T> mlp;

  Block() = default;
  Block(ParamStore<T>& ps, const std::string& prefix, int d, int heads, int mlp_hidden, Rng& rng)
      : ln1(ps, prefix + ".ln1", d),
        ln2(ps, prefix + ".ln2", d),
        attn(ps, prefix + ".attn", d, heads, rng),
        mlp(ps, prefix + ".mlp", d, mlp_hidden, rng) {}

  Mat<T> fwd(const Mat<T>& x, const AttnMask& mask, BlockCache<T>& c) const {
    Mat<T> h = x + attn.fwd(ln1.fwd(x, c.ln1), mask, c.attn);
    return h + mlp.fwd(ln2.fwd(h, c.ln2), c.mlp);
  }

  Mat<T> bwd(const AttnMask& mask, const BlockCache<T>& c, const Mat<T>& dy) const {
    Mat<T> dh = dy + ln2.bwd(c.ln2, mlp.bwd(c.mlp, dy));
    return dh + ln1.bwd(c.ln1, attn.bwd(mask, c.attn, dh));
  }
};

template <typename T>
struct ConvCache {
  Mat<T> cols;  // im2col matrix, (out_h*out_w, 9*c_in)
  int in_h = 0, in_w = 0, out_h = 0, out_w = 0;
};

// 3x3 convolution, stride 2, padding 1, over a token grid stored as
// (h*w, channels) row-major. Output side: floor((in-1)/2)+1.
template <typename T>
struct Conv3x3s2 {
  Tensor<T>* W = nullptr;  // (9*c_in, c_out)
  Tensor<T>* b = nullptr;
  int c_in = 0, c_out = 0;

  Conv3x3s2() = default;
  Conv3x3s2(ParamStore<T>& ps, const std::string& prefix, int in_ch, int out_ch, Rng& rng)
      : c_in(in_ch), c_out(out_ch) {
    W = &ps.add(prefix + ".w", 9 * in_ch, out_ch);
    b = &ps.add(prefix + ".b", 1, out_ch);
    init_normal(*W, rng, 1.0 / std::sqrt(9.0 * in_ch));
  }

  static int out_side(int in) { return (in - 1) / 2 + 1; }

  Mat<T> fwd(const Mat<T>& x, int h, int w, ConvCache<T>& c) const {
    check(x.rows() == static_cast<Eigen::Index>(h) * w && x.cols() == c_in,
          "conv: input grid mismatch");
    c.in_h = h;
    c.in_w = w;
    c.out_h = out_side(h);
    c.out_w = out_side(w);
    c.cols = Mat<T>::Zero(static_cast<Eigen::Index>(c.out_h) * c.out_w, 9 * c_in);
    for (int oy = 0; oy < c.out_h; ++oy) {
      for (int ox = 0; ox < c.out_w; ++ox) {
        Eigen::Index row = static_cast<Eigen::Index>(oy) * c.out_w + ox;
        for (int ky = 0; ky < 3; ++ky) {
          int iy = 2 * oy + ky - 1;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            int ix = 2 * ox + kx - 1;
            if (ix < 0 || ix >= w) continue;
            c.cols.row(row).middleCols((ky * 3 + kx) * c_in, c_in) =
                x.row(static_cast<Eigen::Index>(iy) * w + ix);
          }
        }
      }
    }
    Mat<T> y = c.cols * W->v;
    y.rowwise() += b->v.row(0);
    return y;
  }

  Mat<T> bwd(const ConvCache<T>& c, const Mat<T>& dy) const {
    W->g.noalias() += c.cols.transpose() * dy;
    b->g.row(0) += dy.colwise().sum();
    Mat<T> dcols = dy * W->v.transpose();
    Mat<T> dx = Mat<T>::Zero(static_cast<Eigen::Index>(c.in_h) * c.in_w, c_in);
    for (int oy = 0; oy < c.out_h; ++oy) {
      for (int ox = 0; ox < c.out_w; ++ox) {
        Eigen::Index row = static_cast<Eigen::Index>(oy) * c.out_w + ox;
        for (int ky = 0; ky < 3; ++ky) {
          int iy = 2 * oy + ky - 1;
          if (iy < 0 || iy >= c.in_h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            int ix = 2 * ox + kx - 1;
            if (ix < 0 || ix >= c.in_w) continue;
            dx.row(static_cast<Eigen::Index>(iy) * c.in_w + ix) +=
                dcols.row(row).middleCols((ky * 3 + kx) * c_in, c_in);
          }
        }
      }
    }
    return dx;
  }
};

// Learned 2D positional table on a base grid, bilinearly resampled
// (corner-aligned) to arbitrary target grids.
template <typename T>
struct PosTable2D {
  Tensor<T>* table = nullptr;  // (base_h*base_w, d)
  int base_h = 0, base_w = 0, d = 0;

  PosTable2D() = default;
  PosTable2D(ParamStore<T>& ps, const std::string& name, int bh, int bw, int dim, Rng& rng)
      : base_h(bh), base_w(bw), d(dim) {
    table = &ps.add(name, static_cast<Eigen::Index>(bh) * bw, dim);
    init_normal(*table, rng, 0.02);
  }

  static double coord(int i, int n_out, int n_in) {
    if (n_out == 1) return (n_in - 1) / 2.0;
    return static_cast<double>(i) * (n_in - 1) / (n_out - 1);
  }

  Mat<T> fwd(int gh, int gw) const {
    check(gh >= 1 && gw >= 1, "pos table: target grid must be >= 1x1");
    Mat<T> out(static_cast<Eigen::Index>(gh) * gw, d);
    for (int y = 0; y < gh; ++y) {
      double sy = coord(y, gh, base_h);
      int y0 = static_cast<int>(sy);
      int y1 = std::min(y0 + 1, base_h - 1);
      T fy = static_cast<T>(sy - y0);
      for (int x = 0; x < gw; ++x) {
        double sx = coord(x, gw, base_w);
        int x0 = static_cast<int>(sx);
        int x1 = std::min(x0 + 1, base_w - 1);
        T fx = static_cast<T>(sx - x0);
        out.row(static_cast<Eigen::Index>(y) * gw + x) =
            (T(1) - fy) * ((T(1) - fx) * table->v.row(y0 * base_w + x0) +
                           fx * table->v.row(y0 * base_w + x1)) +
            fy * ((T(1) - fx) * table->v.row(y1 * base_w + x0) +
                  fx * table->v.row(y1 * base_w + x1));
      }
    }
    return out;
  }

  void bwd(int gh, int gw, const Mat<T>& dp) const {
    for (int y = 0; y < gh; ++y) {
      double sy = coord(y, gh, base_h);
      int y0 = static_cast<int>(sy);
      int y1 = std::min(y0 + 1, base_h - 1);
      T fy = static_cast<T>(sy - y0);
      for (int x = 0; x < gw; ++x) {
        double sx = coord(x, gw, base_w);
        int x0 = static_cast<int>(sx);
        int x1 = std::min(x0 + 1, base_w - 1);
        T fx = static_cast<T>(sx - x0);
        auto g = dp.row(static_cast<Eigen::Index>(y) * gw + x);
        table->g.row(y0 * base_w + x0) += (T(1) - fy) * (T(1) - fx) * g;
        table->g.row(y0 * base_w + x1) += (T(1) - fy) * fx * g;
        table->g.row(y1 * base_w + x0) += fy * (T(1) - fx) * g;
        table->g.row(y1 * base_w + x1) += fy * fx * g;
      }
    }
  }
};

}  // namespace occ::nn
