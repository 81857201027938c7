#pragma once

#include <string>
#include <vector>

#include "universa/common.hpp"
#include "universa/metrics/registry.hpp"

namespace universa {

/// Network hyperparameters. Defaults are the full-size configuration:
/// four pre-norm transformer layers of four-head 256-dim self-attention
/// with 1024-dim feed-forward blocks.
struct ModelConfig {
  int d_model = 256;
  int heads = 4;
  int layers = 4;
  int ffn_dim = 1024;
  double dropout = 0.1;
  bool use_ref_audio = true;
  bool use_ref_text = true;
  int feature_dim = 80;
  int text_vocab_size = 0;  // filled in from the tokenizer
  std::vector<std::string> metric_ids;

  void validate() const {
    if (d_model <= 0 || heads <= 0 || layers <= 0 || ffn_dim <= 0) {
      throw ValidationError("model dimensions must be positive");
    }
    if (d_model % heads != 0) {
      throw ValidationError("d_model must be divisible by heads");
    }
    if (dropout < 0.0 || dropout >= 1.0) {
      throw ValidationError("dropout must be in [0, 1)");
    }
    if (feature_dim <= 0) throw ValidationError("feature_dim must be positive");
    if (use_ref_text && text_vocab_size <= 0) {
      throw ValidationError("text encoder enabled but text_vocab_size unset");
    }
    if (metric_ids.empty()) throw ValidationError("metric_ids must be non-empty");
    for (size_t i = 0; i < metric_ids.size(); ++i) {
      for (size_t j = i + 1; j < metric_ids.size(); ++j) {
        if (metric_ids[i] == metric_ids[j]) {
          throw ValidationError("duplicate metric id: " + metric_ids[i]);
        }
      }
    }
  }
};

}  // namespace universa
