// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "occ/common.hpp"
#include "occ/rng.hpp"

namespace occ::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
struct Tensor {
  std::string name;
  Mat<T> v;
  Mat<T> g;
};

// Named parameters plus their gradient buffers, in stable insertion order.
template <typename T>
class ParamStore {
 public:
  Tensor<T>& add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    check(by_name_.find(name) == by_name_.end(), "duplicate parameter: " + name);
    auto t = std::make_unique<Tensor<T>>();
    t->name = name;
    t->v = Mat<T>::Zero(rows, cols);
    t->g = Mat<T>::Zero(rows, cols);
    Tensor<T>* raw = t.get();
    by_name_[name] = raw;
    tensors_.push_back(std::move(t));
    return *raw;
  }

  Tensor<T>& get(const std::string& name) {
    auto it = by_name_.find(name);
    check(it != by_name_.end(), "no such parameter: " + name);
    return *it->second;
  }

  bool has(const std::string& name) const { return by_name_.count(name) > 0; }

  const std::vector<std::unique_ptr<Tensor<T>>>& tensors() const { return tensors_; }
  std::vector<std::unique_ptr<Tensor<T>>>& tensors() { return tensors_; }

  void zero_grad() {
    for (auto& t : tensors_) t->g.setZero();
  }

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& t : tensors_) n += t->v.size();
    return n;
  }

  template <typename Pred>
  int64_t param_count_if(Pred pred) const {
    int64_t n = 0;
    for (const auto& t : tensors_) {
      if (pred(t->name)) n += t->v.size();
    }
    return n;
  }

  double grad_norm() const {
    double s = 0;
    for (const auto& t : tensors_) s += static_cast<double>(t->g.template cast<double>().squaredNorm());
    return std::sqrt(s);
  }

  void clip_grad_norm(double max_norm) {
    double n = grad_norm();
    if (n > max_norm && n > 0) {
      T scale = static_cast<T>(max_norm / n);
      for (auto& t : tensors_) t->g *= scale;
    }
  }

 private:
  std::vector<std::unique_ptr<Tensor<T>>> tensors_;
  std::unordered_map<std::string, Tensor<T>*> by_name_;
};

template <typename T>
void init_normal(Tensor<T>& t, Rng& rng, double std) {
  for (Eigen::Index i = 0; i < t.v.rows(); ++i)
    for (Eigen::Index j = 0; j < t.v.cols(); ++j)
      t.v(i, j) = static_cast<T>(rng.normal() * std);
}

template <typename T>
void init_const(Tensor<T>& t, T value) {
  t.v.setConstant(value);
}

template <typename T>
inline T gelu(T x) {
  return x * T(0.5) * (T(1) + std::erf(x * T(M_SQRT1_2)));
}

template <typename T>
inline T gelu_grad(T x) {
  T cdf = T(0.5) * (T(1) + std::erf(x * T(M_SQRT1_2)));
  T pdf = std::exp(-x * x / T(2)) * T(0.3989422804014327);
  return cdf + x * pdf;
}

/// Row-wise softmax in place, max-subtracted.
template <typename T>
void softmax_rows(Mat<T>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    T mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

// Decoupled weight decay applied to matrix-shaped tensors only (vectors,
// biases, norm scales are exempt).
template <typename T>
class AdamW {
 public:
  struct Config {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
  };

  AdamW() = default;
  AdamW(const ParamStore<T>& ps, Config cfg) : cfg_(cfg) {
    for (const auto& t : ps.tensors()) {
      states_.push_back({Mat<T>::Zero(t->v.rows(), t->v.cols()),
                         Mat<T>::Zero(t->v.rows(), t->v.cols())});
    }
  }

  void step(ParamStore<T>& ps, double lr) {
    check(states_.size() == ps.tensors().size(), "AdamW: store shape changed");
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (size_t i = 0; i < states_.size(); ++i) {
      Tensor<T>& p = *ps.tensors()[i];
      State& s = states_[i];
      s.m = T(cfg_.beta1) * s.m + T(1 - cfg_.beta1) * p.g;
      s.v = T(cfg_.beta2) * s.v + T(1 - cfg_.beta2) * p.g.cwiseProduct(p.g);
      if (cfg_.weight_decay > 0 && p.v.rows() > 1 && p.v.cols() > 1)
        p.v -= T(lr * cfg_.weight_decay) * p.v;
      Mat<T> mhat = s.m / T(bc1);
      Mat<T> vhat = s.v / T(bc2);
      p.v -= T(lr) * (mhat.array() / (vhat.array().sqrt() + T(cfg_.eps))).matrix();
    }
  }

  int64_t step_count() const { return t_; }

  struct State {
    Mat<T> m, v;
  };
  std::vector<State>& states() { return states_; }
  const std::vector<State>& states() const { return states_; }
  void set_step_count(int64_t t) { t_ = t; }
  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  std::vector<State> states_;
  int64_t t_ = 0;
};

}  // namespace occ::nn
