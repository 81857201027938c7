#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "universa/model/param.hpp"

namespace universa {

enum class LrDecay {
  kConstant,  // hold peak_lr after warm-up (the default contract)
  kInvSqrt,   // decay as sqrt(warmup/step) after warm-up (Noam-style)
  kLinear,    // anneal linearly to zero at decay_steps
};

/// Linear warm-up to peak_lr over warmup_steps. All decay modes agree on
/// [0, warmup_steps]; they differ only in the tail. decay_steps is the
/// horizon of the linear tail (ignored by the other modes).
inline double lr_schedule(int64_t step, double peak_lr, int64_t warmup_steps,
                          LrDecay decay = LrDecay::kConstant,
                          int64_t decay_steps = 0) {
  if (step < 0) throw ValidationError("lr_schedule: negative step");
  if (warmup_steps <= 0) return peak_lr;
  const double w = static_cast<double>(warmup_steps);
  if (step <= warmup_steps) return peak_lr * static_cast<double>(step) / w;
  switch (decay) {
    case LrDecay::kInvSqrt:
      return peak_lr * std::sqrt(w / static_cast<double>(step));
    case LrDecay::kLinear: {
      if (decay_steps <= warmup_steps) {
        throw ValidationError("linear lr decay needs decay_steps > warmup_steps");
      }
      const double frac = static_cast<double>(decay_steps - step) /
                          static_cast<double>(decay_steps - warmup_steps);
      return peak_lr * std::max(0.0, frac);
    }
    case LrDecay::kConstant:
      break;
  }
  return peak_lr;
}

inline LrDecay lr_decay_from_name(const std::string& name) {
  if (name == "constant") return LrDecay::kConstant;
  if (name == "inv_sqrt") return LrDecay::kInvSqrt;
  if (name == "linear") return LrDecay::kLinear;
  throw ValidationError("unknown lr_decay mode: " + name);
}

/// Scales gradients so the global norm is at most max_norm; returns the
/// pre-clip norm. No-op when already within the bound or max_norm <= 0.
template <typename S>
double clip_global_norm(GradStore<S>& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) {
    grads.scale(static_cast<S>(max_norm / norm));
  }
  return norm;
}

/// AdamW: decoupled weight decay, betas (0.9, 0.999), eps 1e-8.
template <typename S>
class AdamW {
 public:
  explicit AdamW(const std::vector<Param<S>*>& params, double beta1 = 0.9,
                 double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto* p : params) {
      m_.emplace_back(MatX<S>::Zero(p->value.rows(), p->value.cols()));
      v_.emplace_back(MatX<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step(const std::vector<Param<S>*>& params, const GradStore<S>& grads,
            double lr, double weight_decay) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      MatX<S>& p = params[i]->value;
      const MatX<S>& g = grads.at(i);
      m_[i] = static_cast<S>(beta1_) * m_[i] + static_cast<S>(1.0 - beta1_) * g;
      v_[i] = static_cast<S>(beta2_) * v_[i] +
              static_cast<S>(1.0 - beta2_) * g.cwiseProduct(g);
      if (weight_decay > 0.0) {
        // Multiplicative form: shrink factor (1 - lr*wd) applies exactly.
        p *= static_cast<S>(1.0 - lr * weight_decay);
      }
      const auto m_hat = m_[i].array() / static_cast<S>(bc1);
      const auto v_hat = v_[i].array() / static_cast<S>(bc2);
      p.array() -= static_cast<S>(lr) * m_hat / (v_hat.sqrt() + static_cast<S>(eps_));
    }
  }

  int64_t steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<MatX<S>> m_;
  std::vector<MatX<S>> v_;
};

}  // namespace universa
