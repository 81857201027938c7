#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "universa/model/net.hpp"
#include "universa/text/bpe.hpp"
#include "universa/train/normalize.hpp"

namespace universa {

/// Self-contained model archive.
///
/// Layout (see README for the byte-level description): a text metadata
/// block — format version, config keys, metric registry rows, per-metric
/// normalization stats (hex floats, so reloading is exact), the serialized
/// tokenizer — followed by "tensors N" and N records of one header line
/// ("name rows cols") plus rows*cols little-endian float32 values in
/// row-major order. save(load(path)) reproduces the file byte for byte.
struct Checkpoint {
  ModelConfig config;
  MetricRegistry registry;
  NormalizationStats stats;
  std::optional<BpeModel> bpe;
  std::vector<std::pair<std::string, MatX<float>>> tensors;

  static Checkpoint from_net(const UniversaNet<float>& net,
                             const MetricRegistry& registry,
                             const NormalizationStats& stats,
                             const std::optional<BpeModel>& bpe);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  /// Copies tensors into a net built from this checkpoint's config.
  /// Names and shapes must match exactly.
  void load_into(UniversaNet<float>& net) const;

  std::vector<std::string> tensor_names() const;
};

}  // namespace universa
