#include "universa/metrics/annotate.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "universa/audio/wav.hpp"
#include "universa/metrics/f0.hpp"
#include "universa/metrics/si_snr.hpp"
#include "universa/metrics/stoi.hpp"

namespace universa {

AnnotationResult annotate_pair(const std::string& est_path,
                               const std::string& ref_path) {
  AnnotationResult out;
  Waveform est, ref;
  try {
    est = load_wav(est_path);
    ref = load_wav(ref_path);
    if (est.sample_rate != 16000 || ref.sample_rate != 16000) {
      throw ValidationError("pipeline requires 16 kHz input");
    }
    const auto diff = std::abs(est.samples.size() - ref.samples.size());
    if (diff > kAnnotateTrimLimit) {
      throw ValidationError("length mismatch of " + std::to_string(diff) +
                            " samples exceeds trim limit");
    }
    const auto n = std::min(est.samples.size(), ref.samples.size());
    est.samples.conservativeResize(n);
    ref.samples.conservativeResize(n);
  } catch (const std::exception& e) {
    out.issues.push_back(std::string(e.what()));
    return out;
  }

  try {
    out.labels["si_snr"] = si_snr(est, ref);
  } catch (const std::exception& e) {
    out.issues.push_back("si_snr: " + std::string(e.what()));
  }
  try {
    out.labels["stoi"] = stoi(est, ref);
  } catch (const std::exception& e) {
    out.issues.push_back("stoi: " + std::string(e.what()));
  }
  try {
    auto corr = f0_corr(extract_f0(est), extract_f0(ref));
    if (corr) {
      out.labels["f0_corr"] = *corr;
    } else {
      out.issues.push_back("f0_corr: fewer than 2 co-voiced frames");
    }
  } catch (const std::exception& e) {
    out.issues.push_back("f0_corr: " + std::string(e.what()));
  }
  return out;
}

std::vector<AnnotationResult> annotate(
    const std::vector<std::pair<std::string, std::string>>& est_ref_paths,
    int threads) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  std::vector<AnnotationResult> results(est_ref_paths.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= est_ref_paths.size()) return;
      results[i] = annotate_pair(est_ref_paths[i].first, est_ref_paths[i].second);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace universa
