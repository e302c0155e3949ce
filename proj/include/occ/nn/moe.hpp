// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "occ/nn/layers.hpp"

namespace occ::nn {

template <typename T>
struct ExpertCache {
  std::vector<Eigen::Index> rows;  // token rows routed here
  Mat<T> x, h1;
};

template <typename T>
struct MoECache {
  Mat<T> x;
  Mat<T> probs;                              // (n, n_routed), full softmax
  Mat<T> weights;                            // (n, top_k), renormalized
  std::vector<std::vector<int>> picks;       // (n, top_k) expert indices
  std::vector<Mat<T>> expert_out;            // per slot k: (n, d)
  std::vector<ExpertCache<T>> routed;        // per expert
  std::vector<MlpCache<T>> shared;           // per shared expert
};

// Token-choice MoE: softmax router over routed experts, top-k kept and
// renormalized, ties broken by lower expert index, plus always-on shared
// experts. Selection is non-differentiable; gradients flow through the kept
// weights and the expert paths.
template <typename T>
struct MoELayer {
  Linear<T> router;
  std::vector<Mlp<T>> experts;
  std::vector<Mlp<T>> shared_experts;
  int d = 0, n_routed = 0, top_k = 0;

  MoELayer() = default;
  MoELayer(ParamStore<T>& ps, const std::string& prefix, int d_model, int n_routed_experts,
           int n_shared, int k, int expert_hidden, int shared_hidden, Rng& rng)
      : router(ps, prefix + ".router", d_model, n_routed_experts, rng),
        d(d_model),
        n_routed(n_routed_experts),
        top_k(k) {
    check(k >= 1 && k <= n_routed_experts, "MoE: top_k out of range");
    experts.reserve(static_cast<size_t>(n_routed_experts));
    for (int e = 0; e < n_routed_experts; ++e)
      experts.emplace_back(ps, prefix + ".expert" + std::to_string(e), d_model, expert_hidden,
                           rng);
    shared_experts.reserve(static_cast<size_t>(n_shared));
    for (int s = 0; s < n_shared; ++s)
      shared_experts.emplace_back(ps, prefix + ".shared" + std::to_string(s), d_model,
                                  shared_hidden, rng);
  }

  Mat<T> fwd(const Mat<T>& x, MoECache<T>& c) const {
    Eigen::Index n = x.rows();
    c.x = x;
    c.probs = router.fwd(x);
    softmax_rows(c.probs);
    c.picks.assign(static_cast<size_t>(n), {});
    c.weights.resize(n, top_k);
    c.routed.assign(static_cast<size_t>(n_routed), {});
    std::vector<int> order(static_cast<size_t>(n_routed));
    for (Eigen::Index i = 0; i < n; ++i) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int bb) {
        return c.probs(i, a) > c.probs(i, bb);  // stable: ties keep lower index first
      });
      T sum = 0;
      for (int k = 0; k < top_k; ++k) {
        int e = order[static_cast<size_t>(k)];
        c.picks[static_cast<size_t>(i)].push_back(e);
        sum += c.probs(i, e);
      }
      for (int k = 0; k < top_k; ++k)
        c.weights(i, k) = c.probs(i, c.picks[static_cast<size_t>(i)][static_cast<size_t>(k)]) / sum;
      for (int k = 0; k < top_k; ++k)
        c.routed[static_cast<size_t>(c.picks[static_cast<size_t>(i)][static_cast<size_t>(k)])]
            .rows.push_back(i);
    }

    Mat<T> y = Mat<T>::Zero(n, d);
    c.shared.assign(shared_experts.size(), {});
    for (size_t s = 0; s < shared_experts.size(); ++s)
      y += shared_experts[s].fwd(x, c.shared[s]);

    c.expert_out.assign(static_cast<size_t>(top_k), Mat<T>::Zero(n, d));
    for (int e = 0; e < n_routed; ++e) {
      ExpertCache<T>& ec = c.routed[static_cast<size_t>(e)];
      if (ec.rows.empty()) continue;
      Mat<T> gathered(static_cast<Eigen::Index>(ec.rows.size()), d);
      for (size_t r = 0; r < ec.rows.size(); ++r) gathered.row(static_cast<Eigen::Index>(r)) = x.row(ec.rows[r]);
      MlpCache<T> mc;
      Mat<T> out = experts[static_cast<size_t>(e)].fwd(gathered, mc);
      ec.x = std::move(mc.x);
      ec.h1 = std::move(mc.h1);
      for (size_t r = 0; r < ec.rows.size(); ++r) {
        Eigen::Index i = ec.rows[r];
        for (int k = 0; k < top_k; ++k) {
          if (c.picks[static_cast<size_t>(i)][static_cast<size_t>(k)] == e) {
            c.expert_out[static_cast<size_t>(k)].row(i) = out.row(static_cast<Eigen::Index>(r));
            y.row(i) += c.weights(i, k) * out.row(static_cast<Eigen::Index>(r));
          }
        }
      }
    }
    return y;
  }

  Mat<T> bwd(const MoECache<T>& c, const Mat<T>& dy) const {
    Eigen::Index n = c.x.rows();
    Mat<T> dx = Mat<T>::Zero(n, d);
    for (size_t s = 0; s < shared_experts.size(); ++s)
      dx += shared_experts[s].bwd(c.shared[s], dy);

    // routed expert paths: d(out_e) rows are w * dy
    for (int e = 0; e < n_routed; ++e) {
      const ExpertCache<T>& ec = c.routed[static_cast<size_t>(e)];
      if (ec.rows.empty()) continue;
      Mat<T> dout(static_cast<Eigen::Index>(ec.rows.size()), d);
      for (size_t r = 0; r < ec.rows.size(); ++r) {
        Eigen::Index i = ec.rows[r];
        for (int k = 0; k < top_k; ++k)
          if (c.picks[static_cast<size_t>(i)][static_cast<size_t>(k)] == e)
            dout.row(static_cast<Eigen::Index>(r)) = c.weights(i, k) * dy.row(i);
      }
      MlpCache<T> mc;
      mc.x = ec.x;
      mc.h1 = ec.h1;
      Mat<T> dgathered = experts[static_cast<size_t>(e)].bwd(mc, dout);
      for (size_t r = 0; r < ec.rows.size(); ++r) dx.row(ec.rows[r]) += dgathered.row(static_cast<Eigen::Index>(r));
    }

    // router path: dL/dw -> dL/dprobs (kept slots) -> softmax jacobian
    Mat<T> dlogits = Mat<T>::Zero(n, n_routed);
    for (Eigen::Index i = 0; i < n; ++i) {
      T S = 0;
      for (int k = 0; k < top_k; ++k)
        S += c.probs(i, c.picks[static_cast<size_t>(i)][static_cast<size_t>(k)]);
      // dL/dw_k = dy . expert_out_k
      std::vector<T> dw(static_cast<size_t>(top_k));
      T wdotdw = 0;
      for (int k = 0; k < top_k; ++k) {
        dw[static_cast<size_t>(k)] = dy.row(i).dot(c.expert_out[static_cast<size_t>(k)].row(i));
        wdotdw += dw[static_cast<size_t>(k)] * c.weights(i, k);
      }
      Eigen::Matrix<T, 1, Eigen::Dynamic> dprobs =
          Eigen::Matrix<T, 1, Eigen::Dynamic>::Zero(n_routed);
      for (int k = 0; k < top_k; ++k) {
        int e = c.picks[static_cast<size_t>(i)][static_cast<size_t>(k)];
        dprobs(e) = (dw[static_cast<size_t>(k)] - wdotdw) / S;
      }
      T dot = dprobs.cwiseProduct(c.probs.row(i)).sum();
      dlogits.row(i) = c.probs.row(i).cwiseProduct(dprobs - Eigen::Matrix<T, 1, Eigen::Dynamic>::Constant(n_routed, dot));
    }
    dx += router.bwd(c.x, dlogits);
    return dx;
  }
};

}  // namespace occ::nn
