#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "universa/data/manifest.hpp"
#include "universa/model/checkpoint.hpp"
#include "universa/train/placeholders.hpp"

namespace universa {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 16;
  double peak_lr = 0.001;
  int64_t warmup_steps = 25000;
  std::string lr_decay = "constant";  // or "inv_sqrt" / "linear"
  int64_t decay_steps = 0;            // horizon for the linear tail
  double weight_decay = 0.01;
  double grad_clip_norm = 5.0;
  uint64_t seed = 0;
  int norm_order = 1;  // the loss exponent; 1 is the supported contract
  int threads = 0;     // 0 -> hardware concurrency
  int64_t max_steps = 0;  // 0 -> run all epochs
  int log_every = 10;

  void validate() const;
};

struct TrainResult {
  std::vector<double> dev_losses;  // mean per-utterance loss per epoch
  double best_dev_loss = 0.0;
  int64_t steps_run = 0;
  std::string best_path;
  std::string final_path;
};

/// Return false to stop after the current step (used by the overfit
/// experiments to stop once the target loss is reached).
using StepCallback = std::function<bool(int64_t step, double mean_loss)>;

/// Semi-supervised training: placeholder-completed inputs, masked L1 over
/// normalized targets, AdamW with linear warm-up, shuffled seeded epochs.
/// Saves best-on-dev and final checkpoints under out_dir and returns both
/// paths. When bpe is absent and the text encoder is enabled, a tokenizer
/// is trained on the manifest's text fields first.
TrainResult train_model(const Manifest& train_manifest,
                        const Manifest& dev_manifest, ModelConfig model_cfg,
                        const TrainConfig& train_cfg,
                        std::optional<BpeModel> bpe, const std::string& out_dir,
                        std::ostream& log, const StepCallback& on_step = {});

/// Mean per-utterance masked L1 of a prepared set under the given net
/// (dropout off). Shared by dev evaluation and the acceptance experiments.
double mean_masked_loss(const UniversaNet<float>& net,
                        const std::vector<PreparedExample>& examples,
                        int threads);

/// Parallel preparation of all records (results in input order).
std::vector<PreparedExample> prepare_examples(
    const std::vector<UtteranceRecord>& records, const ModelConfig& cfg,
    const MetricRegistry& registry, const BpeModel* bpe,
    const NormalizationStats* stats, int threads);

}  // namespace universa
