#pragma once

#include "universa/data/manifest.hpp"
#include "universa/model/checkpoint.hpp"

namespace universa {

/// Inference over a manifest: placeholders applied exactly as in training,
/// dropout off, outputs denormalized and clamped to the registry ranges.
/// Returns one row per input row (original fields kept, metrics replaced
/// by the predictions), in input order.
Manifest predict_manifest(const Checkpoint& ckpt, const Manifest& input,
                          int threads = 0);

}  // namespace universa
