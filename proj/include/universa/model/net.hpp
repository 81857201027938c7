#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "universa/model/config.hpp"
#include "universa/model/layers.hpp"

namespace universa {

template <typename S>
struct TransformerStack {
  std::vector<EncoderLayer<S>> layers;

  void build(const ModelConfig& cfg) {
    layers.resize(static_cast<size_t>(cfg.layers));
    for (auto& l : layers) l.build(cfg.d_model, cfg.heads, cfg.ffn_dim);
  }

  struct Trace {
    std::vector<typename EncoderLayer<S>::Trace> layer_traces;
  };

  MatX<S> forward(MatX<S> h, Trace& t, double dropout_p, Rng* rng) const {
    t.layer_traces.resize(layers.size());
    for (size_t i = 0; i < layers.size(); ++i) {
      h = layers[i].forward(h, t.layer_traces[i], dropout_p, rng);
    }
    return h;
  }

  MatX<S> backward(MatX<S> dh, const Trace& t, GradStore<S>& g) const {
    for (size_t i = layers.size(); i-- > 0;) {
      dh = layers[i].backward(dh, t.layer_traces[i], g);
    }
    return dh;
  }
};

/// Feature-input encoder: linear projection to d_model, sinusoidal
/// positions, then the transformer stack.
template <typename S>
struct FeatureEncoder {
  Linear<S> in_proj;
  TransformerStack<S> stack;

  void build(const ModelConfig& cfg) {
    in_proj.build(cfg.d_model, cfg.feature_dim);
    stack.build(cfg);
  }

  struct Trace {
    typename Linear<S>::Trace tproj;
    typename TransformerStack<S>::Trace tstack;
  };

  MatX<S> forward(const MatX<S>& features, Trace& t, double dropout_p,
                  Rng* rng) const {
    if (features.rows() < 1) throw ValidationError("encoder: empty input");
    MatX<S> h = in_proj.forward(features, t.tproj);
    h += sinusoidal_positions<S>(h.rows(), h.cols());
    return stack.forward(std::move(h), t.tstack, dropout_p, rng);
  }

  void backward(const MatX<S>& dh, const Trace& t, GradStore<S>& g) const {
    in_proj.backward(stack.backward(dh, t.tstack, g), t.tproj, g);
  }
};

/// Token-input encoder: embedding table plus positions, same stack shape.
template <typename S>
struct TextEncoder {
  Param<S> embed;  // (vocab, d_model)
  TransformerStack<S> stack;

  void build(const ModelConfig& cfg) {
    embed.value = MatX<S>::Zero(cfg.text_vocab_size, cfg.d_model);
    stack.build(cfg);
  }

  struct Trace {
    std::vector<int> tokens;
    typename TransformerStack<S>::Trace tstack;
  };

  MatX<S> forward(const std::vector<int>& tokens, Trace& t, double dropout_p,
                  Rng* rng) const {
    if (tokens.empty()) throw ValidationError("text encoder: empty token sequence");
    MatX<S> h(static_cast<Eigen::Index>(tokens.size()), embed.value.cols());
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] < 0 || tokens[i] >= embed.value.rows()) {
        throw ValidationError("token id " + std::to_string(tokens[i]) +
                              " out of range (vocab " +
                              std::to_string(embed.value.rows()) + ")");
      }
      h.row(static_cast<Eigen::Index>(i)) = embed.value.row(tokens[i]);
    }
    t.tokens = tokens;
    h += sinusoidal_positions<S>(h.rows(), h.cols());
    return stack.forward(std::move(h), t.tstack, dropout_p, rng);
  }

  void backward(const MatX<S>& dh, const Trace& t, GradStore<S>& g) const {
    const MatX<S> demb = stack.backward(dh, t.tstack, g);
    for (size_t i = 0; i < t.tokens.size(); ++i) {
      g[embed].row(t.tokens[i]) += demb.row(static_cast<Eigen::Index>(i));
    }
  }
};

/// Residual cross-attention: h + CrossAttn(query = LN(h), kv = reference).
/// Zeroed output-projection weights make this an exact identity on h.
template <typename S>
struct CrossAttnBlock {
  LayerNorm<S> ln;
  MultiHeadAttention<S> attn;

  void build(int d_model, int n_heads) {
    ln.build(d_model);
    attn.build(d_model, n_heads);
  }

  struct Trace {
    typename LayerNorm<S>::Trace tln;
    typename MultiHeadAttention<S>::Trace tattn;
    DropoutTrace<S> drop;
  };

  MatX<S> forward(const MatX<S>& h, const MatX<S>& ref, Trace& t,
                  double dropout_p, Rng* rng) const {
    const MatX<S> q = ln.forward(h, t.tln);
    return h + dropout_forward(attn.forward(q, ref, t.tattn), dropout_p, rng,
                               t.drop);
  }

  /// Adds the reference-side gradient into dref; returns dh.
  MatX<S> backward(const MatX<S>& dy, const Trace& t, GradStore<S>& g,
                   MatX<S>& dref) const {
    const MatX<S> dattn = dropout_backward(dy, t.drop);
    const MatX<S> dq = attn.backward(dattn, t.tattn, g, dref);
    return dy + ln.backward(dq, t.tln, g);
  }
};

/// Temporal mean pooling: frames x d -> d.
template <typename S>
VecX<S> mean_pool(const MatX<S>& h) {
  return h.colwise().mean().transpose();
}

/// Masked L1: sum of |pred - target| over present metrics; absent metrics
/// contribute exactly zero to both value and gradient.
template <typename S>
S masked_l1_loss(const VecX<S>& pred, const VecX<S>& target,
                 const std::vector<bool>& mask, VecX<S>* dpred = nullptr) {
  if (pred.size() != target.size() ||
      static_cast<size_t>(pred.size()) != mask.size()) {
    throw ValidationError("masked_l1_loss: metric ordering misaligned");
  }
  S loss = 0;
  if (dpred) *dpred = VecX<S>::Zero(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    const S e = pred[i] - target[i];
    loss += std::abs(e);
    if (dpred) (*dpred)[i] = e > S(0) ? S(1) : (e < S(0) ? S(-1) : S(0));
  }
  return loss;
}

/// The full predictor: a target-audio encoder, optional reference audio
/// and text encoders aligned to the target by residual cross-attention
/// (audio first, then text), mean pooling, and one linear head per metric.
/// Heads operate in normalized target space; denormalization happens in
/// the training/inference layer.
template <typename S>
class UniversaNet {
 public:
  explicit UniversaNet(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    target_encoder_.build(cfg_);
    register_encoder("target_encoder", target_encoder_);
    if (cfg_.use_ref_audio) {
      ref_audio_encoder_ = std::make_unique<FeatureEncoder<S>>();
      ref_audio_encoder_->build(cfg_);
      register_encoder("ref_audio_encoder", *ref_audio_encoder_);
      fuse_audio_ = std::make_unique<CrossAttnBlock<S>>();
      fuse_audio_->build(cfg_.d_model, cfg_.heads);
      register_cross("fuse_audio", *fuse_audio_);
    }
    if (cfg_.use_ref_text) {
      ref_text_encoder_ = std::make_unique<TextEncoder<S>>();
      ref_text_encoder_->build(cfg_);
      add(ref_text_encoder_->embed, "ref_text_encoder.embed");
      register_stack("ref_text_encoder", ref_text_encoder_->stack);
      fuse_text_ = std::make_unique<CrossAttnBlock<S>>();
      fuse_text_->build(cfg_.d_model, cfg_.heads);
      register_cross("fuse_text", *fuse_text_);
    }
    heads_.resize(cfg_.metric_ids.size());
    for (size_t i = 0; i < heads_.size(); ++i) {
      heads_[i].build(1, cfg_.d_model);
      add(heads_[i].w, "heads." + cfg_.metric_ids[i] + ".w");
      add(heads_[i].b, "heads." + cfg_.metric_ids[i] + ".b");
    }
  }

  UniversaNet(const UniversaNet&) = delete;
  UniversaNet& operator=(const UniversaNet&) = delete;

  void init_params(uint64_t seed) {
    Rng rng(seed);
    for (Param<S>* p : params_) {
      const auto& name = p->name;
      const bool is_bias = name.ends_with(".b") || name.ends_with(".beta");
      const bool is_gain = name.ends_with(".gamma");
      if (is_gain) {
        p->value.setOnes();
      } else if (is_bias) {
        p->value.setZero();
      } else {
        xavier_uniform(p->value, static_cast<int>(p->value.cols()),
                       static_cast<int>(p->value.rows()), rng);
      }
    }
  }

  struct Input {
    const MatX<S>* target_features = nullptr;
    const MatX<S>* ref_audio_features = nullptr;
    const std::vector<int>* ref_text_tokens = nullptr;
  };

  struct Trace {
    typename FeatureEncoder<S>::Trace target;
    typename FeatureEncoder<S>::Trace ref_audio;
    typename TextEncoder<S>::Trace ref_text;
    typename CrossAttnBlock<S>::Trace fuse_audio;
    typename CrossAttnBlock<S>::Trace fuse_text;
    MatX<S> ref_audio_h, ref_text_h;
    MatX<S> fused;
    VecX<S> pooled;
  };

  /// Raw normalized-space outputs, one per configured metric. Pass a
  /// generator to enable dropout (training); nullptr runs deterministic
  /// inference.
  VecX<S> forward(const Input& in, Trace& t, Rng* dropout_rng = nullptr) const {
    if (in.target_features == nullptr) {
      throw ValidationError("forward: target features required");
    }
    if (in.target_features->cols() != cfg_.feature_dim) {
      throw ValidationError("feature dim " +
                            std::to_string(in.target_features->cols()) +
                            " does not match configured " +
                            std::to_string(cfg_.feature_dim));
    }
    if (!cfg_.use_ref_audio && in.ref_audio_features != nullptr) {
      throw ValidationError("ref-audio encoder is disabled in this configuration");
    }
    if (!cfg_.use_ref_text && in.ref_text_tokens != nullptr) {
      throw ValidationError("ref-text encoder is disabled in this configuration");
    }
    const double p = cfg_.dropout;
    MatX<S> h = target_encoder_.forward(*in.target_features, t.target, p,
                                        dropout_rng);
    if (cfg_.use_ref_audio) {
      if (in.ref_audio_features == nullptr) {
        throw ValidationError("ref-audio encoder enabled but no input given");
      }
      t.ref_audio_h = ref_audio_encoder_->forward(*in.ref_audio_features,
                                                  t.ref_audio, p, dropout_rng);
      h = fuse_audio_->forward(h, t.ref_audio_h, t.fuse_audio, p, dropout_rng);
    }
    if (cfg_.use_ref_text) {
      if (in.ref_text_tokens == nullptr) {
        throw ValidationError("ref-text encoder enabled but no input given");
      }
      t.ref_text_h = ref_text_encoder_->forward(*in.ref_text_tokens, t.ref_text,
                                                p, dropout_rng);
      h = fuse_text_->forward(h, t.ref_text_h, t.fuse_text, p, dropout_rng);
    }
    t.fused = std::move(h);
    t.pooled = mean_pool(t.fused);
    VecX<S> raw(static_cast<Eigen::Index>(heads_.size()));
    for (size_t i = 0; i < heads_.size(); ++i) {
      raw[static_cast<Eigen::Index>(i)] =
          heads_[i].w.value.row(0).dot(t.pooled) + heads_[i].b.value(0, 0);
    }
    return raw;
  }

  void backward(const Trace& t, const VecX<S>& draw, GradStore<S>& g) const {
    VecX<S> dpooled = VecX<S>::Zero(cfg_.d_model);
    for (size_t i = 0; i < heads_.size(); ++i) {
      const S d = draw[static_cast<Eigen::Index>(i)];
      g[heads_[i].w].row(0) += d * t.pooled.transpose();
      g[heads_[i].b](0, 0) += d;
      dpooled += d * heads_[i].w.value.row(0).transpose();
    }
    const Eigen::Index frames = t.fused.rows();
    MatX<S> dh = (VecX<S>::Ones(frames) / static_cast<S>(frames)) *
                 dpooled.transpose();
    if (cfg_.use_ref_text) {
      MatX<S> dref = MatX<S>::Zero(t.ref_text_h.rows(), t.ref_text_h.cols());
      dh = fuse_text_->backward(dh, t.fuse_text, g, dref);
      ref_text_encoder_->backward(dref, t.ref_text, g);
    }
    if (cfg_.use_ref_audio) {
      MatX<S> dref = MatX<S>::Zero(t.ref_audio_h.rows(), t.ref_audio_h.cols());
      dh = fuse_audio_->backward(dh, t.fuse_audio, g, dref);
      ref_audio_encoder_->backward(dref, t.ref_audio, g);
    }
    target_encoder_.backward(dh, t.target, g);
  }

  const ModelConfig& config() const { return cfg_; }
  const std::vector<Param<S>*>& params() const { return params_; }

  Param<S>* find_param(const std::string& name) const {
    for (Param<S>* p : params_) {
      if (p->name == name) return p;
    }
    return nullptr;
  }

 private:
  void add(Param<S>& p, std::string name) {
    p.name = std::move(name);
    p.index = static_cast<int>(params_.size());
    params_.push_back(&p);
  }

  void register_linear(const std::string& prefix, Linear<S>& l) {
    add(l.w, prefix + ".w");
    add(l.b, prefix + ".b");
  }

  void register_norm(const std::string& prefix, LayerNorm<S>& n) {
    add(n.gamma, prefix + ".gamma");
    add(n.beta, prefix + ".beta");
  }

  void register_attn(const std::string& prefix, MultiHeadAttention<S>& a) {
    register_linear(prefix + ".wq", a.wq);
    register_linear(prefix + ".wk", a.wk);
    register_linear(prefix + ".wv", a.wv);
    register_linear(prefix + ".wo", a.wo);
  }

  void register_stack(const std::string& prefix, TransformerStack<S>& s) {
    for (size_t i = 0; i < s.layers.size(); ++i) {
      const std::string lp = prefix + ".layers." + std::to_string(i);
      register_norm(lp + ".ln1", s.layers[i].ln1);
      register_attn(lp + ".attn", s.layers[i].attn);
      register_norm(lp + ".ln2", s.layers[i].ln2);
      register_linear(lp + ".ffn.fc1", s.layers[i].ffn.fc1);
      register_linear(lp + ".ffn.fc2", s.layers[i].ffn.fc2);
    }
  }

  void register_encoder(const std::string& prefix, FeatureEncoder<S>& e) {
    register_linear(prefix + ".in_proj", e.in_proj);
    register_stack(prefix, e.stack);
  }

  void register_cross(const std::string& prefix, CrossAttnBlock<S>& c) {
    register_norm(prefix + ".ln", c.ln);
    register_attn(prefix + ".attn", c.attn);
  }

  ModelConfig cfg_;
  FeatureEncoder<S> target_encoder_;
  std::unique_ptr<FeatureEncoder<S>> ref_audio_encoder_;
  std::unique_ptr<TextEncoder<S>> ref_text_encoder_;
  std::unique_ptr<CrossAttnBlock<S>> fuse_audio_;
  std::unique_ptr<CrossAttnBlock<S>> fuse_text_;
  std::vector<Linear<S>> heads_;
  std::vector<Param<S>*> params_;
};

}  // namespace universa
