#pragma once

#include <vector>

#include "universa/data/manifest.hpp"
#include "universa/model/config.hpp"
#include "universa/text/bpe.hpp"
#include "universa/train/normalize.hpp"

namespace universa {

/// A record turned into model-ready inputs with the missing-reference
/// placeholders applied: absent reference audio becomes the features of a
/// one-second zero clip; absent reference text falls back to the pseudo
/// transcription, then to the BLANK token. The label mask depends only on
/// label presence, never on reference presence.
struct PreparedExample {
  std::string id;
  MatX<float> target_features;
  MatX<float> ref_audio_features;  // populated iff config.use_ref_audio
  std::vector<int> text_tokens;    // populated iff config.use_ref_text
  VecX<float> targets;             // normalized when stats given, else clamped
  std::vector<bool> mask;
};

/// stats may be null (inference: targets stay in clamped label space).
/// bpe is required when cfg.use_ref_text. Throws on unreadable target
/// audio or a feature-dim mismatch against cfg.feature_dim.
PreparedExample make_placeholders(const UtteranceRecord& record,
                                  const ModelConfig& cfg,
                                  const MetricRegistry& registry,
                                  const BpeModel* bpe,
                                  const NormalizationStats* stats);

/// Features of the 1 s zero-audio placeholder clip (cached).
const MatX<float>& zero_audio_features();

}  // namespace universa
