#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "universa/common.hpp"

namespace universa {

/// Oracle labels for one (degraded, reference) pair. Metrics that could
/// not be computed are simply absent, with the reason recorded.
struct AnnotationResult {
  std::map<std::string, double> labels;  // subset of {si_snr, stoi, f0_corr}
  std::vector<std::string> issues;
};

/// Maximum length mismatch repaired by trimming both signals to the
/// shorter one (10 ms at 16 kHz); larger gaps are alignment bugs.
inline constexpr int kAnnotateTrimLimit = 160;

/// Computes si_snr / stoi / f0_corr for each pair of wav paths. Per-pair
/// failures become missing labels with a logged reason; the batch never
/// aborts. Runs across `threads` workers, results in input order.
std::vector<AnnotationResult> annotate(
    const std::vector<std::pair<std::string, std::string>>& est_ref_paths,
    int threads = 0);

/// Single-pair version.
AnnotationResult annotate_pair(const std::string& est_path,
                               const std::string& ref_path);

}  // namespace universa
