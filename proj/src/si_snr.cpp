#include "universa/metrics/si_snr.hpp"

#include <algorithm>
#include <cmath>

namespace universa {

double si_snr(const Arr& est, const Arr& ref) {
  if (est.size() != ref.size()) {
    throw ValidationError("si_snr: length mismatch (" +
                          std::to_string(est.size()) + " vs " +
                          std::to_string(ref.size()) + ")");
  }
  if (est.size() < 1) throw ValidationError("si_snr: empty input");

  Arr e = est - est.mean();
  Arr r = ref - ref.mean();
  const double ref_power = r.square().sum();
  if (ref_power <= 0.0) {
    throw ValidationError("si_snr: degenerate (all-constant) reference");
  }
  const double alpha = (e * r).sum() / ref_power;
  const double target_power = alpha * alpha * ref_power;
  const double noise_power = (e - alpha * r).square().sum();
  if (target_power <= 0.0) return kSiSnrClampLo;
  if (noise_power <= 0.0) return kSiSnrClampHi;
  const double snr = 10.0 * std::log10(target_power / noise_power);
  return std::clamp(snr, kSiSnrClampLo, kSiSnrClampHi);
}

double si_snr(const Waveform& est, const Waveform& ref) {
  return si_snr(est.samples, ref.samples);
}

}  // namespace universa
