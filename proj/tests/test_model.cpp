#include <doctest.h>

#include <cmath>

#include "universa/model/net.hpp"
#include "universa/rng.hpp"

using namespace universa;

namespace {

ModelConfig tiny_config(bool ref_audio = true, bool ref_text = true) {
  ModelConfig cfg;
  cfg.d_model = 8;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.ffn_dim = 16;
  cfg.dropout = 0.0;
  cfg.use_ref_audio = ref_audio;
  cfg.use_ref_text = ref_text;
  cfg.feature_dim = 5;
  cfg.text_vocab_size = 12;
  cfg.metric_ids = {"mos", "stoi"};
  return cfg;
}

template <typename S>
MatX<S> random_features(int frames, int dims, uint64_t seed) {
  Rng rng(seed);
  MatX<S> m(frames, dims);
  for (int r = 0; r < frames; ++r) {
    for (int c = 0; c < dims; ++c) m(r, c) = static_cast<S>(rng.uniform(-1.0, 1.0));
  }
  return m;
}

template <typename S>
typename UniversaNet<S>::Input make_input(const ModelConfig& cfg,
                                          const MatX<S>* target,
                                          const MatX<S>* ref_audio,
                                          const std::vector<int>* tokens) {
  typename UniversaNet<S>::Input in;
  in.target_features = target;
  if (cfg.use_ref_audio) in.ref_audio_features = ref_audio;
  if (cfg.use_ref_text) in.ref_text_tokens = tokens;
  return in;
}

}  // namespace

TEST_CASE("net: output shape and coverage contract") {
  const ModelConfig cfg = tiny_config();
  UniversaNet<float> net(cfg);
  net.init_params(1);
  const std::vector<int> tokens = {1, 2, 3};
  for (int frames : {1, 7, 40}) {
    const auto target = random_features<float>(frames, 5, 10 + frames);
    const auto ref = random_features<float>(9, 5, 20 + frames);
    UniversaNet<float>::Trace trace;
    const auto raw =
        net.forward(make_input<float>(cfg, &target, &ref, &tokens), trace);
    CHECK(raw.size() == 2);  // one output per configured metric
    CHECK(trace.fused.rows() == frames);
    CHECK(trace.fused.cols() == cfg.d_model);
    CHECK(raw.allFinite());
  }
}

TEST_CASE("net: deterministic forward with dropout off") {
  const ModelConfig cfg = tiny_config();
  UniversaNet<float> net(cfg);
  net.init_params(2);
  const auto target = random_features<float>(12, 5, 1);
  const auto ref = random_features<float>(6, 5, 2);
  const std::vector<int> tokens = {4, 5};
  UniversaNet<float>::Trace t1, t2;
  const auto a = net.forward(make_input<float>(cfg, &target, &ref, &tokens), t1);
  const auto b = net.forward(make_input<float>(cfg, &target, &ref, &tokens), t2);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("net: dropout changes activations and is seed-reproducible") {
  ModelConfig cfg = tiny_config();
  cfg.dropout = 0.3;
  UniversaNet<float> net(cfg);
  net.init_params(2);
  const auto target = random_features<float>(12, 5, 1);
  const auto ref = random_features<float>(6, 5, 2);
  const std::vector<int> tokens = {4, 5};
  const auto in = make_input<float>(cfg, &target, &ref, &tokens);
  UniversaNet<float>::Trace t1, t2, t3;
  Rng r1(7), r2(7), r3(8);
  const auto a = net.forward(in, t1, &r1);
  const auto b = net.forward(in, t2, &r2);
  const auto c = net.forward(in, t3, &r3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0f);  // same dropout seed
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0f);   // different seed
}

TEST_CASE("net: permuting input frames changes the output") {
  const ModelConfig cfg = tiny_config(false, false);
  UniversaNet<float> net(cfg);
  net.init_params(3);
  const auto target = random_features<float>(10, 5, 5);
  MatX<float> permuted = target;
  permuted.row(0).swap(permuted.row(9));
  UniversaNet<float>::Trace t1, t2;
  const auto a = net.forward(make_input<float>(cfg, &target, nullptr, nullptr), t1);
  const auto b = net.forward(make_input<float>(cfg, &permuted, nullptr, nullptr), t2);
  CHECK((a - b).cwiseAbs().maxCoeff() > 0.0f);
}

TEST_CASE("net: BLANK token encodes to a single hidden frame") {
  const ModelConfig cfg = tiny_config();
  UniversaNet<float> net(cfg);
  net.init_params(4);
  const auto target = random_features<float>(5, 5, 6);
  const auto ref = random_features<float>(5, 5, 7);
  const std::vector<int> blank = {2};
  UniversaNet<float>::Trace trace;
  net.forward(make_input<float>(cfg, &target, &ref, &blank), trace);
  CHECK(trace.ref_text_h.rows() == 1);
  CHECK(trace.ref_text_h.cols() == cfg.d_model);
}

TEST_CASE("net: disabled reference encoders reject inputs, enabled require them") {
  const ModelConfig cfg = tiny_config(false, false);
  UniversaNet<float> net(cfg);
  net.init_params(5);
  const auto target = random_features<float>(5, 5, 8);
  const auto ref = random_features<float>(5, 5, 9);
  UniversaNet<float>::Trace trace;
  UniversaNet<float>::Input in;
  in.target_features = &target;
  in.ref_audio_features = &ref;  // not allowed: encoder eliminated
  CHECK_THROWS_AS(net.forward(in, trace), ValidationError);

  const ModelConfig full = tiny_config();
  UniversaNet<float> net2(full);
  net2.init_params(5);
  UniversaNet<float>::Input missing;
  missing.target_features = &target;
  CHECK_THROWS_AS(net2.forward(missing, trace), ValidationError);

  MatX<float> bad_dims = random_features<float>(5, 7, 10);
  UniversaNet<float>::Input wrong;
  wrong.target_features = &bad_dims;
  CHECK_THROWS_AS(net.forward(wrong, trace), ValidationError);

  const std::vector<int> oob = {99};
  const auto in_full = make_input<float>(full, &target, &ref, &oob);
  CHECK_THROWS_AS(net2.forward(in_full, trace), ValidationError);
}

TEST_CASE("net: zeroed cross-attention projections make fusion an identity") {
  const ModelConfig full = tiny_config();
  UniversaNet<float> with_refs(full);
  with_refs.init_params(11);
  for (const char* name : {"fuse_audio.attn.wo.w", "fuse_audio.attn.wo.b",
                           "fuse_text.attn.wo.w", "fuse_text.attn.wo.b"}) {
    Param<float>* p = with_refs.find_param(name);
    REQUIRE(p != nullptr);
    p->value.setZero();
  }

  // Same target encoder + heads in a net without references.
  const ModelConfig bare_cfg = tiny_config(false, false);
  UniversaNet<float> bare(bare_cfg);
  bare.init_params(12);
  for (Param<float>* p : bare.params()) {
    Param<float>* src = with_refs.find_param(p->name);
    REQUIRE(src != nullptr);
    p->value = src->value;
  }

  const auto target = random_features<float>(14, 5, 13);
  const auto ref = random_features<float>(9, 5, 14);
  const std::vector<int> tokens = {3, 4, 5};
  UniversaNet<float>::Trace t1, t2;
  const auto fused_out =
      with_refs.forward(make_input<float>(full, &target, &ref, &tokens), t1);
  const auto plain_out =
      bare.forward(make_input<float>(bare_cfg, &target, nullptr, nullptr), t2);
  CHECK((t1.fused - t2.fused).cwiseAbs().maxCoeff() == 0.0f);  // residual path
  CHECK((fused_out - plain_out).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("mean pooling of a constant matrix returns that row") {
  MatX<float> h(4, 3);
  h << 1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3;
  const VecX<float> p = mean_pool(h);
  CHECK(p[0] == 1.0f);
  CHECK(p[1] == 2.0f);
  CHECK(p[2] == 3.0f);
}

TEST_CASE("masked_l1_loss: values and subgradients") {
  VecX<float> pred(3), target(3);
  pred << 0.2f, 1.0f, -2.0f;
  target << 0.7f, 1.0f, -2.0f;

  SUBCASE("pred equals target") {
    CHECK(masked_l1_loss<float>(target, target, {true, true, true}) == 0.0f);
  }
  SUBCASE("single present metric") {
    VecX<float> d;
    const float loss = masked_l1_loss<float>(pred, target, {true, false, false}, &d);
    CHECK(loss == doctest::Approx(0.5f));
    CHECK(d[0] == -1.0f);
    CHECK(d[1] == 0.0f);
    CHECK(d[2] == 0.0f);
  }
  SUBCASE("all masked: zero loss and zero gradient everywhere") {
    const ModelConfig cfg = tiny_config();
    UniversaNet<float> net(cfg);
    net.init_params(20);
    const auto feat = random_features<float>(6, 5, 21);
    const auto ref = random_features<float>(6, 5, 22);
    const std::vector<int> tokens = {1};
    UniversaNet<float>::Trace trace;
    const auto raw =
        net.forward(make_input<float>(cfg, &feat, &ref, &tokens), trace);
    VecX<float> d;
    VecX<float> t2 = VecX<float>::Constant(2, 9.0f);
    const float loss = masked_l1_loss<float>(raw, t2, {false, false}, &d);
    CHECK(loss == 0.0f);
    GradStore<float> g(net.params());
    net.backward(trace, d, g);
    CHECK(g.squared_norm() == 0.0);
  }
  SUBCASE("misaligned mask") {
    CHECK_THROWS_AS(masked_l1_loss<float>(pred, target, {true}), ValidationError);
  }
}

TEST_CASE("net: batched gradients are the sum of per-utterance gradients") {
  const ModelConfig cfg = tiny_config();
  UniversaNet<float> net(cfg);
  net.init_params(30);
  const std::vector<int> tokens = {1, 3};
  const auto f1 = random_features<float>(6, 5, 31);
  const auto f2 = random_features<float>(9, 5, 32);
  const auto ref = random_features<float>(4, 5, 33);
  VecX<float> targets(2);
  targets << 0.3f, -0.4f;

  GradStore<float> g1(net.params()), g2(net.params()), gsum(net.params());
  auto run = [&](const MatX<float>& f, GradStore<float>& g) {
    UniversaNet<float>::Trace tr;
    const auto raw = net.forward(make_input<float>(cfg, &f, &ref, &tokens), tr);
    VecX<float> d;
    const float loss = masked_l1_loss<float>(raw, targets, {true, true}, &d);
    net.backward(tr, d, g);
    return loss;
  };
  const float l1 = run(f1, g1);
  const float l2 = run(f2, g2);
  const float lsum = run(f1, gsum) + run(f2, gsum);
  CHECK(lsum == l1 + l2);
  for (size_t i = 0; i < gsum.size(); ++i) {
    CHECK((gsum.at(i) - (g1.at(i) + g2.at(i))).cwiseAbs().maxCoeff() == 0.0f);
  }
}

TEST_CASE("net: masking invariance is bitwise") {
  const ModelConfig cfg = tiny_config();
  UniversaNet<float> net(cfg);
  net.init_params(40);
  const auto feat = random_features<float>(7, 5, 41);
  const auto ref = random_features<float>(5, 5, 42);
  const std::vector<int> tokens = {2, 6};
  const std::vector<bool> mask = {true, false};  // stoi masked
  VecX<float> targets(2);
  targets << 0.5f, 1.0f;

  auto run = [&](const VecX<float>& t, GradStore<float>& g) {
    UniversaNet<float>::Trace tr;
    const auto raw = net.forward(make_input<float>(cfg, &feat, &ref, &tokens), tr);
    VecX<float> d;
    const float loss = masked_l1_loss<float>(raw, t, mask, &d);
    net.backward(tr, d, g);
    return loss;
  };
  GradStore<float> g1(net.params()), g2(net.params());
  const float l1 = run(targets, g1);
  VecX<float> perturbed = targets;
  perturbed[1] = -123.0f;  // masked target changes
  const float l2 = run(perturbed, g2);
  CHECK(l1 == l2);
  for (size_t i = 0; i < g1.size(); ++i) {
    CHECK((g1.at(i) - g2.at(i)).cwiseAbs().maxCoeff() == 0.0f);
  }
}

TEST_CASE("net: analytic gradients match central finite differences") {
  // Small double-precision check on every module; the acceptance suite
  // runs the full 200-parameter version.
  const ModelConfig cfg = tiny_config();
  UniversaNet<double> net(cfg);
  net.init_params(50);
  const auto feat = random_features<double>(6, 5, 51);
  const auto ref = random_features<double>(4, 5, 52);
  const std::vector<int> tokens = {1, 7, 3};
  VecX<double> targets(2);
  targets << 0.37, -0.81;
  const std::vector<bool> mask = {true, true};
  const auto in = make_input<double>(cfg, &feat, &ref, &tokens);

  auto loss_fn = [&]() {
    UniversaNet<double>::Trace tr;
    const auto raw = net.forward(in, tr);
    return masked_l1_loss<double>(raw, targets, mask);
  };

  GradStore<double> g(net.params());
  {
    UniversaNet<double>::Trace tr;
    const auto raw = net.forward(in, tr);
    VecX<double> d;
    masked_l1_loss<double>(raw, targets, mask, &d);
    net.backward(tr, d, g);
  }

  Rng rng(53);
  const double h = 1e-4;
  int checked = 0;
  for (int k = 0; k < 60; ++k) {
    const size_t pi = rng.below(net.params().size());
    Param<double>* p = net.params()[pi];
    const auto r = static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(p->value.rows())));
    const auto c = static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(p->value.cols())));
    const double keep = p->value(r, c);
    p->value(r, c) = keep + h;
    const double lp = loss_fn();
    p->value(r, c) = keep - h;
    const double lm = loss_fn();
    p->value(r, c) = keep;
    const double numeric = (lp - lm) / (2.0 * h);
    const double analytic = g.at(pi)(r, c);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    CHECK(std::abs(numeric - analytic) / denom < 1e-4);
    ++checked;
  }
  CHECK(checked == 60);
}
