#include "universa/metrics/f0.hpp"

#include <algorithm>
#include <cmath>

#include "universa/audio/stft.hpp"

namespace universa {

F0Track extract_f0(const Waveform& w, const F0Config& cfg) {
  if (w.sample_rate != 16000) {
    throw ValidationError("extract_f0 expects 16 kHz input, got " +
                          std::to_string(w.sample_rate) + " Hz");
  }
  const int fs = w.sample_rate;
  const int win = static_cast<int>(std::lround(cfg.window_s * fs));
  const int hop = static_cast<int>(std::lround(cfg.hop_s * fs));
  const int lag_max = static_cast<int>(std::floor(fs / cfg.fmin_hz));
  const int lag_min = static_cast<int>(std::ceil(fs / cfg.fmax_hz));
  const int cmp = win - lag_max;  // comparison segment fits inside the window
  const int frames = frame_count(w.samples.size(), win, hop);
  if (frames < 1) {
    throw ValidationError("extract_f0: waveform shorter than one 40 ms frame");
  }

  F0Track track;
  track.frame_shift_s = cfg.hop_s;
  track.f0_hz = Arr::Zero(frames);
  track.voiced.assign(static_cast<size_t>(frames), false);

  Arr diff(lag_max + 1);
  Arr cmnd(lag_max + 1);
  for (int f = 0; f < frames; ++f) {
    const auto frame = w.samples.segment(static_cast<Eigen::Index>(f) * hop, win);

    diff[0] = 0.0;
    double running = 0.0;
    cmnd[0] = 1.0;
    for (int tau = 1; tau <= lag_max; ++tau) {
      diff[tau] = (frame.head(cmp) - frame.segment(tau, cmp)).square().sum();
      running += diff[tau];
      cmnd[tau] = running > 0.0 ? diff[tau] * tau / running : 1.0;
    }

    int best = lag_min;
    for (int tau = lag_min; tau <= lag_max; ++tau) {
      if (cmnd[tau] < cmnd[best]) best = tau;
    }
    if (cmnd[best] >= cfg.voicing_threshold) continue;  // unvoiced

    // First local minimum under the threshold; avoids locking onto a
    // period multiple when several dips are equally deep.
    int lag = best;
    for (int tau = lag_min; tau <= lag_max; ++tau) {
      if (cmnd[tau] >= cfg.voicing_threshold) continue;
      const bool left_ok = tau == 1 || cmnd[tau] <= cmnd[tau - 1];
      const bool right_ok = tau == lag_max || cmnd[tau] <= cmnd[tau + 1];
      if (left_ok && right_ok) {
        lag = tau;
        break;
      }
    }

    double refined = lag;
    if (lag > 1 && lag < lag_max) {
      const double a = cmnd[lag - 1], b = cmnd[lag], c = cmnd[lag + 1];
      const double denom = a - 2.0 * b + c;
      if (std::abs(denom) > 1e-12) {
        refined += std::clamp(0.5 * (a - c) / denom, -1.0, 1.0);
      }
    }
    track.voiced[static_cast<size_t>(f)] = true;
    track.f0_hz[f] = std::clamp(fs / refined, cfg.fmin_hz, cfg.fmax_hz);
  }
  return track;
}

std::optional<double> f0_corr(const F0Track& est, const F0Track& ref) {
  if (est.frames() != ref.frames()) {
    throw ValidationError("f0_corr: frame count mismatch (" +
                          std::to_string(est.frames()) + " vs " +
                          std::to_string(ref.frames()) + ")");
  }
  std::vector<double> x, y;
  for (int t = 0; t < est.frames(); ++t) {
    if (est.voiced[static_cast<size_t>(t)] && ref.voiced[static_cast<size_t>(t)]) {
      x.push_back(est.f0_hz[t]);
      y.push_back(ref.f0_hz[t]);
    }
  }
  if (x.size() < 2) return std::nullopt;

  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Arr xv = Eigen::Map<const Arr>(x.data(), n);
  Arr yv = Eigen::Map<const Arr>(y.data(), n);
  xv -= xv.mean();
  yv -= yv.mean();
  const double denom = std::sqrt(xv.square().sum() * yv.square().sum());
  if (denom <= 0.0) return std::nullopt;  // constant contour
  return std::clamp((xv * yv).sum() / denom, -1.0, 1.0);
}

}  // namespace universa
