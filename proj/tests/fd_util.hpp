// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "occ/nn/core.hpp"

namespace occ::testutil {

// Mixed tolerance: relative for healthy magnitudes, absolute floor below
// the central-difference noise scale (loss deltas ~1e-12 over 2*eps).
inline double rel_err(double a, double b) {
  double denom = std::max({std::abs(a), std::abs(b), 1e-3});
  return std::abs(a - b) / denom;
}

/// Central finite differences over sampled parameter coordinates against the
/// gradients already accumulated in the store. The loss closure must re-run
/// the forward pass and must not touch gradients.
template <typename LossFn>
double max_param_fd_error(nn::ParamStore<double>& ps, LossFn loss, double eps = 1e-5,
                          int coords_per_tensor = 24, uint64_t seed = 123) {
  Rng rng(seed);
  double worst = 0;
  for (auto& t : ps.tensors()) {
    int64_t size = t->v.size();
    int n_check = static_cast<int>(std::min<int64_t>(size, coords_per_tensor));
    for (int c = 0; c < n_check; ++c) {
      Eigen::Index idx =
          static_cast<Eigen::Index>(rng.uniform_index(static_cast<size_t>(size)));
      double* p = t->v.data() + idx;
      double orig = *p;
      *p = orig + eps;
      double lp = loss();
      *p = orig - eps;
      double lm = loss();
      *p = orig;
      double fd = (lp - lm) / (2 * eps);
      double an = *(t->g.data() + idx);
      if (std::abs(fd) < 1e-10 && std::abs(an) < 1e-10) continue;
      worst = std::max(worst, rel_err(an, fd));
    }
  }
  return worst;
}

/// Same but for an input matrix whose analytic gradient was returned by bwd.
template <typename LossFn>
double max_input_fd_error(nn::Mat<double>& x, const nn::Mat<double>& dx, LossFn loss,
                          double eps = 1e-5, int coords = 48, uint64_t seed = 321) {
  Rng rng(seed);
  double worst = 0;
  int n_check = static_cast<int>(std::min<int64_t>(x.size(), coords));
  for (int c = 0; c < n_check; ++c) {
    Eigen::Index idx = static_cast<Eigen::Index>(rng.uniform_index(static_cast<size_t>(x.size())));
    double* p = x.data() + idx;
    double orig = *p;
    *p = orig + eps;
    double lp = loss();
    *p = orig - eps;
    double lm = loss();
    *p = orig;
    double fd = (lp - lm) / (2 * eps);
    double an = *(dx.data() + idx);
    if (std::abs(fd) < 1e-10 && std::abs(an) < 1e-10) continue;
    worst = std::max(worst, rel_err(an, fd));
  }
  return worst;
}

inline nn::Mat<double> random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  nn::Mat<double> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal() * scale;
  return m;
}

}  // namespace occ::testutil
