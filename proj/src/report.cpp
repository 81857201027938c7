#include "universa/eval/report.hpp"

#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "universa/eval/correlation.hpp"
#include "universa/metrics/registry.hpp"

namespace universa {

EvaluationReport evaluate(const Manifest& predictions, const Manifest& truth) {
  std::unordered_map<std::string, const UtteranceRecord*> truth_by_id;
  for (const auto& rec : truth.records) truth_by_id.emplace(rec.id, &rec);

  const MetricRegistry registry = MetricRegistry::defaults();
  EvaluationReport report;
  bool any_pairable = false;
  for (size_t m = 0; m < registry.size(); ++m) {
    const auto& info = registry.at(m);
    std::vector<double> pred, gt;
    for (const auto& rec : predictions.records) {
      auto t = truth_by_id.find(rec.id);
      if (t == truth_by_id.end()) continue;
      auto pv = rec.metrics.find(info.id);
      auto tv = t->second->metrics.find(info.id);
      if (pv == rec.metrics.end() || tv == t->second->metrics.end()) continue;
      pred.push_back(pv->second);
      gt.push_back(tv->second);
    }
    if (pred.empty()) continue;  // metric absent from this comparison

    MetricReport row;
    row.id = info.id;
    row.domain = info.domain;
    row.count = static_cast<int>(pred.size());
    if (pred.size() >= 2) {
      any_pairable = true;
      row.lcc = pearson_lcc(pred, gt);
      row.srcc = spearman_srcc(pred, gt);
    }
    report.rows.push_back(std::move(row));
  }
  if (!any_pairable) {
    throw ValidationError("evaluate: fewer than 2 paired utterances for every metric");
  }

  double lcc_sum = 0.0, srcc_sum = 0.0;
  int lcc_n = 0, srcc_n = 0;
  for (const auto& row : report.rows) {
    if (row.lcc) { lcc_sum += *row.lcc; ++lcc_n; }
    if (row.srcc) { srcc_sum += *row.srcc; ++srcc_n; }
  }
  if (lcc_n > 0) report.avg_lcc = lcc_sum / lcc_n;
  if (srcc_n > 0) report.avg_srcc = srcc_sum / srcc_n;
  return report;
}

namespace {

std::string fmt4(const std::optional<double>& v) {
  if (!v) return "   undef";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%8.4f", *v);
  return buf;
}

std::string fmt_full(const std::optional<double>& v) {
  if (!v) return "na";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", *v);
  return buf;
}

}  // namespace

std::string EvaluationReport::to_table() const {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-16s %-8s %8s %8s %6s\n", "domain", "metric",
                "lcc", "srcc", "n");
  out << buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-16s %-8s %s %s %6d\n", row.domain.c_str(),
                  row.id.c_str(), fmt4(row.lcc).c_str(), fmt4(row.srcc).c_str(),
                  row.count);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-16s %-8s %s %s\n", "", "avg",
                fmt4(avg_lcc).c_str(), fmt4(avg_srcc).c_str());
  out << buf;
  return out.str();
}

std::string EvaluationReport::to_rows() const {
  std::ostringstream out;
  for (const auto& row : rows) {
    out << row.id << '\t' << fmt_full(row.lcc) << '\t' << fmt_full(row.srcc)
        << '\t' << row.count << '\n';
  }
  out << "avg\t" << fmt_full(avg_lcc) << '\t' << fmt_full(avg_srcc) << "\t-\n";
  return out.str();
}

}  // namespace universa
