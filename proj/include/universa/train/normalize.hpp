#pragma once

#include <vector>

#include "universa/data/manifest.hpp"
#include "universa/metrics/registry.hpp"

namespace universa {

/// Per-metric standardization statistics, aligned with a registry's metric
/// order. Labels are clamped to the registry clamp range before both the
/// statistics and the normalization itself, so normalize/denormalize round
/// trips reproduce the clamped label.
struct NormalizationStats {
  static constexpr double kSigmaFloor = 1e-6;

  Vec mean;
  Vec stddev;  // >= kSigmaFloor

  size_t size() const { return static_cast<size_t>(mean.size()); }

  double normalize(size_t i, double clamped_value) const {
    return (clamped_value - mean[static_cast<Eigen::Index>(i)]) /
           stddev[static_cast<Eigen::Index>(i)];
  }
  double denormalize(size_t i, double raw) const {
    return raw * stddev[static_cast<Eigen::Index>(i)] +
           mean[static_cast<Eigen::Index>(i)];
  }
};

/// Clamp-then-standardize statistics over present labels only (population
/// std). A configured metric with zero labels anywhere in the records is
/// an error: that head would be untrainable.
NormalizationStats compute_norm_stats(const std::vector<UtteranceRecord>& records,
                                      const MetricRegistry& registry);

}  // namespace universa
