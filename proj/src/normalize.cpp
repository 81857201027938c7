#include "universa/train/normalize.hpp"

#include <cmath>

namespace universa {

NormalizationStats compute_norm_stats(const std::vector<UtteranceRecord>& records,
                                      const MetricRegistry& registry) {
  const size_t n_metrics = registry.size();
  NormalizationStats stats;
  stats.mean = Vec::Zero(static_cast<Eigen::Index>(n_metrics));
  stats.stddev = Vec::Zero(static_cast<Eigen::Index>(n_metrics));

  for (size_t i = 0; i < n_metrics; ++i) {
    const auto& id = registry.at(i).id;
    std::vector<double> values;
    for (const auto& rec : records) {
      auto it = rec.metrics.find(id);
      if (it != rec.metrics.end()) values.push_back(registry.clamp(i, it->second));
    }
    if (values.empty()) {
      throw ValidationError("metric '" + id +
                            "' has no labels in the training data");
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    stats.mean[static_cast<Eigen::Index>(i)] = mean;
    stats.stddev[static_cast<Eigen::Index>(i)] =
        std::max(std::sqrt(var), NormalizationStats::kSigmaFloor);
  }
  return stats;
}

}  // namespace universa
