#pragma once

#include <cmath>
#include <vector>

#include "universa/model/param.hpp"

namespace universa {

// Layers separate parameters (in the layer object, shared and read-only
// during forward) from per-call activations (in Trace objects) so one set
// of weights can serve many threads.

template <typename S>
struct Linear {
  Param<S> w;  // (out, in)
  Param<S> b;  // (out, 1)

  void build(int out, int in) {
    w.value = MatX<S>::Zero(out, in);
    b.value = MatX<S>::Zero(out, 1);
  }

  struct Trace {
    MatX<S> x;
  };

  MatX<S> forward(const MatX<S>& x, Trace& t) const {
    if (x.cols() != w.value.cols()) {
      throw ValidationError("linear: input dim " + std::to_string(x.cols()) +
                            " != " + std::to_string(w.value.cols()));
    }
    t.x = x;
    return (x * w.value.transpose()).rowwise() + b.value.col(0).transpose();
  }

  MatX<S> backward(const MatX<S>& dy, const Trace& t, GradStore<S>& g) const {
    g[w].noalias() += dy.transpose() * t.x;
    g[b].col(0) += dy.colwise().sum().transpose();
    return dy * w.value;
  }
};

template <typename S>
struct LayerNorm {
  static constexpr S kEps = static_cast<S>(1e-5);
  Param<S> gamma;  // (d, 1)
  Param<S> beta;   // (d, 1)

  void build(int d) {
    gamma.value = MatX<S>::Ones(d, 1);
    beta.value = MatX<S>::Zero(d, 1);
  }

  struct Trace {
    MatX<S> xhat;
    VecX<S> inv_std;
  };

  MatX<S> forward(const MatX<S>& x, Trace& t) const {
    const Eigen::Index d = x.cols();
    t.xhat.resize(x.rows(), d);
    t.inv_std.resize(x.rows());
    MatX<S> y(x.rows(), d);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const S mu = x.row(r).mean();
      const S var = (x.row(r).array() - mu).square().mean();
      const S is = S(1) / std::sqrt(var + kEps);
      t.inv_std[r] = is;
      t.xhat.row(r) = (x.row(r).array() - mu) * is;
      y.row(r) = t.xhat.row(r).cwiseProduct(gamma.value.col(0).transpose()) +
                 beta.value.col(0).transpose();
    }
    return y;
  }

  MatX<S> backward(const MatX<S>& dy, const Trace& t, GradStore<S>& g) const {
    g[beta].col(0) += dy.colwise().sum().transpose();
    g[gamma].col(0) += dy.cwiseProduct(t.xhat).colwise().sum().transpose();
    MatX<S> dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      const auto dxhat =
          dy.row(r).cwiseProduct(gamma.value.col(0).transpose()).array();
      const S m1 = dxhat.mean();
      const S m2 = (dxhat * t.xhat.row(r).array()).mean();
      dx.row(r) =
          ((dxhat - m1 - t.xhat.row(r).array() * m2) * t.inv_std[r]).matrix();
    }
    return dx;
  }
};

/// Inverted dropout; active only when a generator is supplied.
template <typename S>
struct DropoutTrace {
  MatX<S> mask;
  bool active = false;
};

template <typename S>
MatX<S> dropout_forward(const MatX<S>& x, double p, Rng* rng,
                        DropoutTrace<S>& t) {
  if (rng == nullptr || p <= 0.0) {
    t.active = false;
    return x;
  }
  t.active = true;
  const S keep_inv = static_cast<S>(1.0 / (1.0 - p));
  t.mask.resize(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      t.mask(r, c) = rng->uniform() < p ? S(0) : keep_inv;
    }
  }
  return x.cwiseProduct(t.mask);
}

template <typename S>
MatX<S> dropout_backward(const MatX<S>& dy, const DropoutTrace<S>& t) {
  return t.active ? dy.cwiseProduct(t.mask).eval() : dy;
}

template <typename S>
struct MultiHeadAttention {
  int heads = 0;
  Linear<S> wq, wk, wv, wo;

  void build(int d_model, int n_heads) {
    heads = n_heads;
    wq.build(d_model, d_model);
    wk.build(d_model, d_model);
    wv.build(d_model, d_model);
    wo.build(d_model, d_model);
  }

  struct Trace {
    typename Linear<S>::Trace tq, tk, tv, to;
    MatX<S> q, k, v;
    std::vector<MatX<S>> attn;  // per-head row-softmax weights (Tq x Tk)
    MatX<S> ctx;
  };

  MatX<S> forward(const MatX<S>& q_in, const MatX<S>& kv_in, Trace& t) const {
    const Eigen::Index d = wq.w.value.rows();
    const Eigen::Index dh = d / heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    t.q = wq.forward(q_in, t.tq);
    t.k = wk.forward(kv_in, t.tk);
    t.v = wv.forward(kv_in, t.tv);
    t.attn.assign(static_cast<size_t>(heads), MatX<S>());
    t.ctx.resize(q_in.rows(), d);
    for (int h = 0; h < heads; ++h) {
      const auto qh = t.q.middleCols(h * dh, dh);
      const auto kh = t.k.middleCols(h * dh, dh);
      const auto vh = t.v.middleCols(h * dh, dh);
      MatX<S> scores = qh * kh.transpose() * scale;
      // Row-wise stable softmax.
      for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const S mx = scores.row(r).maxCoeff();
        scores.row(r) = (scores.row(r).array() - mx).exp();
        scores.row(r) /= scores.row(r).sum();
      }
      t.attn[static_cast<size_t>(h)] = scores;
      t.ctx.middleCols(h * dh, dh).noalias() = scores * vh;
    }
    return wo.forward(t.ctx, t.to);
  }

  /// Returns the gradient w.r.t. q_in and accumulates the k/v path into
  /// dkv_in (self-attention callers pass the same downstream buffer).
  MatX<S> backward(const MatX<S>& dy, const Trace& t, GradStore<S>& g,
                   MatX<S>& dkv_in) const {
    const Eigen::Index d = wq.w.value.rows();
    const Eigen::Index dh = d / heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dh));
    const MatX<S> dctx = wo.backward(dy, t.to, g);
    MatX<S> dq(t.q.rows(), d), dk(t.k.rows(), d), dv(t.v.rows(), d);
    for (int h = 0; h < heads; ++h) {
      const auto qh = t.q.middleCols(h * dh, dh);
      const auto kh = t.k.middleCols(h * dh, dh);
      const auto vh = t.v.middleCols(h * dh, dh);
      const auto& a = t.attn[static_cast<size_t>(h)];
      const auto dch = dctx.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh).noalias() = a.transpose() * dch;
      MatX<S> da = dch * vh.transpose();
      // softmax backward: ds = a .* (da - rowsum(da .* a))
      MatX<S> ds(a.rows(), a.cols());
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const S dot = a.row(r).dot(da.row(r));
        ds.row(r) = (a.row(r).array() * (da.row(r).array() - dot)).matrix();
      }
      dq.middleCols(h * dh, dh).noalias() = ds * kh * scale;
      dk.middleCols(h * dh, dh).noalias() = ds.transpose() * qh * scale;
    }
    dkv_in += wk.backward(dk, t.tk, g);
    dkv_in += wv.backward(dv, t.tv, g);
    return wq.backward(dq, t.tq, g);
  }
};

template <typename S>
struct FeedForward {
  Linear<S> fc1, fc2;

  void build(int d_model, int hidden) {
    fc1.build(hidden, d_model);
    fc2.build(d_model, hidden);
  }

  struct Trace {
    typename Linear<S>::Trace t1, t2;
    MatX<S> pre_act;
  };

  MatX<S> forward(const MatX<S>& x, Trace& t) const {
    t.pre_act = fc1.forward(x, t.t1);
    return fc2.forward(t.pre_act.cwiseMax(S(0)), t.t2);
  }

  MatX<S> backward(const MatX<S>& dy, const Trace& t, GradStore<S>& g) const {
    MatX<S> dh = fc2.backward(dy, t.t2, g);
    dh = dh.cwiseProduct(
        (t.pre_act.array() > S(0)).template cast<S>().matrix());
    return fc1.backward(dh, t.t1, g);
  }
};

/// Pre-norm residual transformer layer: self-attention then feed-forward.
template <typename S>
struct EncoderLayer {
  LayerNorm<S> ln1, ln2;
  MultiHeadAttention<S> attn;
  FeedForward<S> ffn;

  void build(int d_model, int n_heads, int ffn_dim) {
    ln1.build(d_model);
    ln2.build(d_model);
    attn.build(d_model, n_heads);
    ffn.build(d_model, ffn_dim);
  }

  struct Trace {
    typename LayerNorm<S>::Trace tln1, tln2;
    typename MultiHeadAttention<S>::Trace tattn;
    typename FeedForward<S>::Trace tffn;
    DropoutTrace<S> drop1, drop2;
  };

  MatX<S> forward(const MatX<S>& x, Trace& t, double dropout_p,
                  Rng* rng) const {
    const MatX<S> a = ln1.forward(x, t.tln1);
    const MatX<S> sa =
        dropout_forward(attn.forward(a, a, t.tattn), dropout_p, rng, t.drop1);
    const MatX<S> u = x + sa;
    const MatX<S> b = ln2.forward(u, t.tln2);
    const MatX<S> ff =
        dropout_forward(ffn.forward(b, t.tffn), dropout_p, rng, t.drop2);
    return u + ff;
  }

  MatX<S> backward(const MatX<S>& dy, const Trace& t, GradStore<S>& g) const {
    MatX<S> du = dy;
    du += ln2.backward(ffn.backward(dropout_backward(dy, t.drop2), t.tffn, g),
                       t.tln2, g);
    MatX<S> dln1_out = MatX<S>::Zero(du.rows(), du.cols());
    const MatX<S> dattn = dropout_backward(du, t.drop1);
    const MatX<S> dq = attn.backward(dattn, t.tattn, g, dln1_out);
    dln1_out += dq;  // query and key/value paths share the ln1 output
    return du + ln1.backward(dln1_out, t.tln1, g);
  }
};

/// Sinusoidal positions, added after the input projection/embedding.
template <typename S>
MatX<S> sinusoidal_positions(Eigen::Index frames, Eigen::Index d_model) {
  MatX<S> pe(frames, d_model);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index i = 0; i < d_model; i += 2) {
      const double angle =
          static_cast<double>(t) /
          std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d_model));
      pe(t, i) = static_cast<S>(std::sin(angle));
      if (i + 1 < d_model) pe(t, i + 1) = static_cast<S>(std::cos(angle));
    }
  }
  return pe;
}

}  // namespace universa
