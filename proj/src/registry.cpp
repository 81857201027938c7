#include "universa/metrics/registry.hpp"

#include <algorithm>
#include <limits>

namespace universa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MetricRegistry MetricRegistry::defaults() {
  MetricRegistry r;
  // SI-SNR and WER are nominally unbounded; their clamps keep L1 training
  // targets finite and tame outliers.
  r.metrics_ = {
      {"si_snr", "noise", -kInf, kInf, -30.0, 40.0, RefType::kSignal},
      {"pesq", "noise", 1.0, 4.5, 1.0, 4.5, RefType::kSignal},
      {"dnsmos", "noise", 1.0, 5.0, 1.0, 5.0, RefType::kNone},
      {"f0_corr", "prosody", -1.0, 1.0, -1.0, 1.0, RefType::kSignal},
      {"mos", "naturalness", 1.0, 5.0, 1.0, 5.0, RefType::kNone},
      {"utmos", "naturalness", 1.0, 5.0, 1.0, 5.0, RefType::kNone},
      {"sheet", "naturalness", 1.0, 5.0, 1.0, 5.0, RefType::kNone},
      {"wer", "intelligibility", 0.0, kInf, 0.0, 2.0, RefType::kText},
      {"stoi", "intelligibility", 0.0, 1.0, 0.0, 1.0, RefType::kSignal},
      {"sbert", "intelligibility", 0.0, 1.0, 0.0, 1.0, RefType::kSignal},
      {"spk_sim", "speaker", -1.0, 1.0, -1.0, 1.0, RefType::kSignal},
  };
  return r;
}

MetricRegistry MetricRegistry::restrict(
    const std::vector<std::string>& ids) const {
  if (ids.empty()) throw ValidationError("metric set must be non-empty");
  for (const auto& id : ids) {
    if (!has(id)) throw ValidationError("unknown metric id: " + id);
  }
  MetricRegistry out;
  for (const auto& m : metrics_) {
    if (std::find(ids.begin(), ids.end(), m.id) != ids.end()) {
      out.metrics_.push_back(m);
    }
  }
  return out;
}

std::optional<size_t> MetricRegistry::index_of(const std::string& id) const {
  for (size_t i = 0; i < metrics_.size(); ++i) {
    if (metrics_[i].id == id) return i;
  }
  return std::nullopt;
}

const MetricInfo& MetricRegistry::info(const std::string& id) const {
  auto i = index_of(id);
  if (!i) throw ValidationError("unknown metric id: " + id);
  return metrics_[*i];
}

std::vector<std::string> MetricRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(metrics_.size());
  for (const auto& m : metrics_) out.push_back(m.id);
  return out;
}

double MetricRegistry::clamp(size_t i, double v) const {
  return std::clamp(v, metrics_[i].clamp_lo, metrics_[i].clamp_hi);
}

std::string ref_type_name(RefType t) {
  switch (t) {
    case RefType::kNone: return "none";
    case RefType::kSignal: return "signal";
    case RefType::kText: return "text";
  }
  return "none";
}

RefType ref_type_from_name(const std::string& s) {
  if (s == "none") return RefType::kNone;
  if (s == "signal") return RefType::kSignal;
  if (s == "text") return RefType::kText;
  throw ValidationError("unknown reference type: " + s);
}

}  // namespace universa
