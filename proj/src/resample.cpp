#include "universa/audio/resample.hpp"

#include <cmath>
#include <numbers>

namespace universa {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw ValidationError("resample: target rate must be positive");
  if (w.sample_rate <= 0) throw ValidationError("resample: invalid source rate");
  if (w.sample_rate == target_rate) return w;

  const int64_t n_in = w.samples.size();
  const int64_t n_out =
      std::llround(static_cast<double>(n_in) * target_rate / w.sample_rate);

  // Cutoff at 0.45x the smaller Nyquist, measured in input samples. When
  // downsampling the kernel stretches so it still rejects the folded band.
  const double fc = 0.45 * std::min(w.sample_rate, target_rate) / w.sample_rate;
  const double stretch =
      std::max(1.0, static_cast<double>(w.sample_rate) / target_rate);
  const int half_width = static_cast<int>(std::ceil(32.0 * stretch));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples = Arr::Zero(n_out);

  const double step = static_cast<double>(w.sample_rate) / target_rate;
  for (int64_t n = 0; n < n_out; ++n) {
    const double center = n * step;
    const int64_t m0 = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center)) - half_width);
    const int64_t m1 = std::min<int64_t>(n_in - 1, static_cast<int64_t>(std::floor(center)) + half_width);
    double acc = 0.0;
    double norm = 0.0;
    for (int64_t m = m0; m <= m1; ++m) {
      const double t = static_cast<double>(m) - center;
      const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * t / half_width);
      const double h = 2.0 * fc * sinc(2.0 * fc * t) * win;
      acc += h * w.samples[m];
      norm += h;
    }
    // Normalizing by the local kernel sum keeps DC flat at the edges.
    out.samples[n] = norm != 0.0 ? acc / norm : 0.0;
  }
  return out;
}

}  // namespace universa
