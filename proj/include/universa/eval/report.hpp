#pragma once

#include <optional>
#include <string>
#include <vector>

#include "universa/data/manifest.hpp"

namespace universa {

struct MetricReport {
  std::string id;
  std::string domain;
  std::optional<double> lcc;   // absent when undefined (constant column)
  std::optional<double> srcc;
  int count = 0;  // paired utterances
};

/// Utterance-level evaluation: per-metric LCC and SRCC over utterances
/// carrying both a prediction and a ground-truth value, plus unweighted
/// averages over the defined metrics. Undefined correlations are reported
/// as missing and excluded from the averages, never coerced to 0.
struct EvaluationReport {
  std::vector<MetricReport> rows;
  std::optional<double> avg_lcc;
  std::optional<double> avg_srcc;

  /// Human-readable table, four decimals.
  std::string to_table() const;
  /// Machine-readable rows: "metric<TAB>lcc<TAB>srcc<TAB>n" with "na" for
  /// undefined values, full precision.
  std::string to_rows() const;
};

EvaluationReport evaluate(const Manifest& predictions, const Manifest& truth);

}  // namespace universa
