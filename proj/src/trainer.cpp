#include "universa/train/trainer.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "universa/audio/fbank.hpp"
#include "universa/audio/wav.hpp"
#include "universa/data/features_io.hpp"
#include "universa/train/optimizer.hpp"

namespace universa {

namespace {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return hw > 0 ? hw : 1;
}

// Per-utterance loss and gradients; trace lives only inside the call.
double forward_backward_one(const UniversaNet<float>& net,
                            const PreparedExample& ex, Rng* dropout_rng,
                            GradStore<float>* grads) {
  typename UniversaNet<float>::Input in;
  in.target_features = &ex.target_features;
  if (net.config().use_ref_audio) in.ref_audio_features = &ex.ref_audio_features;
  if (net.config().use_ref_text) in.ref_text_tokens = &ex.text_tokens;
  typename UniversaNet<float>::Trace trace;
  const VecX<float> raw = net.forward(in, trace, dropout_rng);
  VecX<float> draw;
  const float loss = masked_l1_loss(raw, ex.targets, ex.mask, &draw);
  if (grads != nullptr) net.backward(trace, draw, *grads);
  return loss;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0) {
    throw ValidationError("epochs and batch_size must be positive");
  }
  if (peak_lr <= 0.0 || warmup_steps < 0 || weight_decay < 0.0) {
    throw ValidationError("invalid optimizer configuration");
  }
  if (norm_order != 1) {
    throw ValidationError("only norm_order 1 is supported");
  }
  lr_decay_from_name(lr_decay);
}

const MatX<float>& zero_audio_features() {
  static const MatX<float> cached = [] {
    Waveform zero{Arr::Zero(16000), 16000};
    return log_mel_fbank(zero).values.cast<float>().eval();
  }();
  return cached;
}

PreparedExample make_placeholders(const UtteranceRecord& record,
                                  const ModelConfig& cfg,
                                  const MetricRegistry& registry,
                                  const BpeModel* bpe,
                                  const NormalizationStats* stats) {
  PreparedExample ex;
  ex.id = record.id;

  if (record.features) {
    const FeatureMatrix feat = read_features(*record.features);
    if (feat.dims() != cfg.feature_dim) {
      throw ValidationError("record " + record.id + ": feature dim " +
                            std::to_string(feat.dims()) +
                            " does not match configured " +
                            std::to_string(cfg.feature_dim));
    }
    ex.target_features = feat.values.cast<float>();
  } else {
    Waveform w;
    try {
      w = load_wav(record.audio);
    } catch (const std::exception& e) {
      throw ValidationError("record " + record.id + ": " + e.what());
    }
    ex.target_features = log_mel_fbank(w).values.cast<float>();
  }

  if (cfg.use_ref_audio) {
    if (record.ref_audio) {
      Waveform w = load_wav(*record.ref_audio);
      ex.ref_audio_features = log_mel_fbank(w).values.cast<float>();
    } else {
      ex.ref_audio_features = zero_audio_features();
    }
  }

  if (cfg.use_ref_text) {
    if (bpe == nullptr) {
      throw ValidationError("text encoder enabled but no tokenizer available");
    }
    if (record.text) {
      ex.text_tokens = bpe->encode(*record.text);
    } else if (record.pseudo_text) {
      ex.text_tokens = bpe->encode(*record.pseudo_text);
    } else {
      ex.text_tokens = {BpeModel::kBlank};
    }
  }

  const size_t n = registry.size();
  ex.targets = VecX<float>::Zero(static_cast<Eigen::Index>(n));
  ex.mask.assign(n, false);
  for (size_t i = 0; i < n; ++i) {
    auto it = record.metrics.find(registry.at(i).id);
    if (it == record.metrics.end()) continue;
    double v = registry.clamp(i, it->second);
    if (stats != nullptr) v = stats->normalize(i, v);
    ex.targets[static_cast<Eigen::Index>(i)] = static_cast<float>(v);
    ex.mask[i] = true;
  }
  return ex;
}

std::vector<PreparedExample> prepare_examples(
    const std::vector<UtteranceRecord>& records, const ModelConfig& cfg,
    const MetricRegistry& registry, const BpeModel* bpe,
    const NormalizationStats* stats, int threads) {
  threads = resolve_threads(threads);
  std::vector<PreparedExample> out(records.size());
  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        out[i] = make_placeholders(records[i], cfg, registry, bpe, stats);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw ValidationError(first_error);
  return out;
}

double mean_masked_loss(const UniversaNet<float>& net,
                        const std::vector<PreparedExample>& examples,
                        int threads) {
  if (examples.empty()) return 0.0;
  threads = resolve_threads(threads);
  std::vector<double> losses(examples.size(), 0.0);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= examples.size()) return;
      losses[i] = forward_backward_one(net, examples[i], nullptr, nullptr);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  double total = 0.0;
  for (double l : losses) total += l;  // fixed order, deterministic
  return total / static_cast<double>(examples.size());
}

TrainResult train_model(const Manifest& train_manifest,
                        const Manifest& dev_manifest, ModelConfig model_cfg,
                        const TrainConfig& train_cfg,
                        std::optional<BpeModel> bpe, const std::string& out_dir,
                        std::ostream& log, const StepCallback& on_step) {
  namespace fs = std::filesystem;
  train_cfg.validate();
  if (train_manifest.records.empty()) {
    throw ValidationError("training set is empty");
  }
  if (model_cfg.metric_ids.empty()) {
    model_cfg.metric_ids = MetricRegistry::defaults().ids();
  }
  const MetricRegistry registry =
      MetricRegistry::defaults().restrict(model_cfg.metric_ids);

  if (model_cfg.use_ref_text) {
    if (!bpe) {
      std::vector<std::string> corpus;
      for (const auto& rec : train_manifest.records) {
        if (rec.text) corpus.push_back(*rec.text);
        if (rec.pseudo_text) corpus.push_back(*rec.pseudo_text);
      }
      if (corpus.empty()) {
        throw ValidationError(
            "text encoder enabled but the training manifest has no text");
      }
      bpe = BpeModel::train(corpus, 500);
      log << "trained bpe tokenizer: vocab " << bpe->vocab_size() << "\n";
    }
    model_cfg.text_vocab_size = bpe->vocab_size();
  } else {
    bpe.reset();
  }

  const NormalizationStats stats =
      compute_norm_stats(train_manifest.records, registry);

  const int threads = resolve_threads(train_cfg.threads);
  std::vector<PreparedExample> train_set = prepare_examples(
      train_manifest.records, model_cfg, registry,
      bpe ? &*bpe : nullptr, &stats, threads);
  std::vector<PreparedExample> dev_set = prepare_examples(
      dev_manifest.records, model_cfg, registry, bpe ? &*bpe : nullptr, &stats,
      threads);

  UniversaNet<float> net(model_cfg);
  net.init_params(train_cfg.seed);
  AdamW<float> opt(net.params());
  GradStore<float> grads(net.params());
  std::vector<GradStore<float>> worker_grads;
  for (int t = 0; t < threads; ++t) worker_grads.emplace_back(net.params());

  fs::create_directories(out_dir);
  TrainResult result;
  result.best_path = (fs::path(out_dir) / "best.ckpt").string();
  result.final_path = (fs::path(out_dir) / "final.ckpt").string();

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(train_cfg.seed, 0xdead));

  double best_dev = std::numeric_limits<double>::infinity();
  int64_t step = 0;
  int consecutive_bad = 0;
  bool stop = false;

  for (int epoch = 0; epoch < train_cfg.epochs && !stop; ++epoch) {
    shuffle_rng.shuffle(order);
    for (size_t start = 0; start < order.size() && !stop;
         start += static_cast<size_t>(train_cfg.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(train_cfg.batch_size));
      const size_t bsz = end - start;

      // Static partition: worker t owns a contiguous index slice, so the
      // per-thread sums (and their final reduction order) never depend on
      // scheduling.
      std::vector<double> batch_losses(bsz, 0.0);
      std::vector<std::thread> pool;
      const size_t per = (bsz + static_cast<size_t>(threads) - 1) /
                         static_cast<size_t>(threads);
      for (int t = 0; t < threads; ++t) {
        const size_t lo = static_cast<size_t>(t) * per;
        const size_t hi = std::min(bsz, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, t] {
          worker_grads[static_cast<size_t>(t)].zero();
          for (size_t k = lo; k < hi; ++k) {
            const size_t idx = order[start + k];
            Rng dropout_rng(
                mix_seed(train_cfg.seed, 0x1000000ull + static_cast<uint64_t>(step) * 65536 + idx));
            batch_losses[k] = forward_backward_one(
                net, train_set[idx], &dropout_rng,
                &worker_grads[static_cast<size_t>(t)]);
          }
        });
      }
      for (auto& th : pool) th.join();

      grads.zero();
      for (size_t t = 0; t < pool.size(); ++t) grads.add(worker_grads[t]);
      double batch_loss = 0.0;
      bool finite = true;
      std::string bad_ids;
      for (size_t k = 0; k < bsz; ++k) {
        batch_loss += batch_losses[k];
        if (!std::isfinite(batch_losses[k])) {
          finite = false;
          bad_ids += (bad_ids.empty() ? "" : ", ") + train_set[order[start + k]].id;
        }
      }
      batch_loss /= static_cast<double>(bsz);

      if (!finite || !grads.all_finite()) {
        log << "step=" << step << " non-finite loss/gradients"
            << (bad_ids.empty() ? "" : " (utterances: " + bad_ids + ")")
            << ", skipping step\n";
        if (++consecutive_bad >= 3) {
          throw std::runtime_error(
              "aborting: non-finite loss in 3 consecutive batches (last ids: " +
              bad_ids + ")");
        }
        ++step;
        continue;
      }
      consecutive_bad = 0;

      clip_global_norm(grads, train_cfg.grad_clip_norm);
      const double lr =
          lr_schedule(step, train_cfg.peak_lr, train_cfg.warmup_steps,
                      lr_decay_from_name(train_cfg.lr_decay), train_cfg.decay_steps);
      opt.step(net.params(), grads, lr, train_cfg.weight_decay);
      ++step;
      if (train_cfg.log_every > 0 && step % train_cfg.log_every == 0) {
        log << "step=" << step << " lr=" << lr << " loss=" << batch_loss << "\n";
      }
      if (on_step && !on_step(step, batch_loss)) stop = true;
      if (train_cfg.max_steps > 0 && step >= train_cfg.max_steps) stop = true;
    }

    const auto save_ckpt = [&](const std::string& path) {
      Checkpoint::from_net(net, registry, stats, bpe).save(path);
    };
    if (!dev_set.empty()) {
      const double dev_loss = mean_masked_loss(net, dev_set, threads);
      result.dev_losses.push_back(dev_loss);
      log << "epoch=" << (epoch + 1) << " dev_loss=" << dev_loss << "\n";
      if (dev_loss < best_dev) {
        best_dev = dev_loss;
        save_ckpt(result.best_path);
      }
    } else {
      log << "epoch=" << (epoch + 1) << " dev_loss=na\n";
    }
  }

  Checkpoint::from_net(net, registry, stats, bpe).save(result.final_path);
  if (!fs::exists(result.best_path)) {
    // No dev set (or it never improved): the final model doubles as best.
    Checkpoint::from_net(net, registry, stats, bpe).save(result.best_path);
  }
  result.best_dev_loss = best_dev;
  result.steps_run = step;
  return result;
}

}  // namespace universa
