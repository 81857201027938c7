#pragma once

#include <optional>
#include <string>
#include <vector>

#include "universa/common.hpp"

namespace universa {

enum class RefType { kNone, kSignal, kText };

struct MetricInfo {
  std::string id;
  std::string domain;
  double range_lo;  // nominal range (may be infinite)
  double range_hi;
  double clamp_lo;  // training/prediction clamp (always finite)
  double clamp_hi;
  RefType ref_type;
};

/// The ordered metric set: ids, ranges, clamps, and reference types.
/// Defaults to the 11 built-in metrics; can be restricted to a subset
/// (single-task training) without changing the relative order.
class MetricRegistry {
 public:
  static MetricRegistry defaults();

  /// Subset in default order. Throws on unknown ids.
  MetricRegistry restrict(const std::vector<std::string>& ids) const;

  const std::vector<MetricInfo>& metrics() const { return metrics_; }
  size_t size() const { return metrics_.size(); }
  const MetricInfo& at(size_t i) const { return metrics_[i]; }

  std::optional<size_t> index_of(const std::string& id) const;
  bool has(const std::string& id) const { return index_of(id).has_value(); }
  const MetricInfo& info(const std::string& id) const;

  std::vector<std::string> ids() const;

  double clamp(size_t i, double v) const;

 private:
  std::vector<MetricInfo> metrics_;
};

std::string ref_type_name(RefType t);
RefType ref_type_from_name(const std::string& s);

}  // namespace universa
