#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "universa/common.hpp"
#include "universa/rng.hpp"

namespace universa {

/// A named learnable tensor. Gradients live in a separate GradStore so
/// parameters stay immutable during (possibly concurrent) inference.
template <typename S>
struct Param {
  std::string name;
  int index = -1;  // position in the owning net's registry / GradStore
  MatX<S> value;
};

/// Gradient buffers aligned with a parameter registry.
template <typename S>
class GradStore {
 public:
  explicit GradStore(const std::vector<Param<S>*>& params) {
    grads_.reserve(params.size());
    for (const auto* p : params) {
      grads_.emplace_back(MatX<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  MatX<S>& operator[](const Param<S>& p) { return grads_[static_cast<size_t>(p.index)]; }
  MatX<S>& at(size_t i) { return grads_[i]; }
  const MatX<S>& at(size_t i) const { return grads_[i]; }
  size_t size() const { return grads_.size(); }

  void zero() {
    for (auto& g : grads_) g.setZero();
  }

  void add(const GradStore<S>& other) {
    for (size_t i = 0; i < grads_.size(); ++i) grads_[i] += other.grads_[i];
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& g : grads_) s += static_cast<double>(g.template cast<double>().squaredNorm());
    return s;
  }

  bool all_finite() const {
    for (const auto& g : grads_) {
      if (!g.allFinite()) return false;
    }
    return true;
  }

  void scale(S a) {
    for (auto& g : grads_) g *= a;
  }

 private:
  std::vector<MatX<S>> grads_;
};

/// Xavier-uniform fill; biases and norm offsets are zeroed elsewhere.
template <typename S>
void xavier_uniform(MatX<S>& m, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = static_cast<S>(rng.uniform(-limit, limit));
    }
  }
}

}  // namespace universa
