#pragma once

#include <optional>
#include <vector>

#include "universa/audio/wav.hpp"

namespace universa {

/// Per-frame pitch track. f0_hz[t] > 0 iff voiced[t]; voiced values lie
/// in [50, 500] Hz.
struct F0Track {
  Arr f0_hz;
  std::vector<bool> voiced;
  double frame_shift_s = 0.010;

  int frames() const { return static_cast<int>(f0_hz.size()); }
};

struct F0Config {
  double fmin_hz = 50.0;
  double fmax_hz = 500.0;
  double window_s = 0.040;
  double hop_s = 0.010;
  double voicing_threshold = 0.2;
};

/// YIN-style pitch tracking: per 40 ms frame, the cumulative-mean-
/// normalized difference function over the 50-500 Hz lag band. A frame is
/// voiced iff the band minimum dips below the threshold; the reported lag
/// is the first local minimum under the threshold, refined parabolically.
/// Expects 16 kHz input with at least one frame of samples.
F0Track extract_f0(const Waveform& w, const F0Config& cfg = {});

/// Pearson correlation of the two f0 contours over frames voiced in BOTH
/// tracks. Returns nullopt when fewer than 2 co-voiced frames exist or
/// either contour is constant over them; callers map that to a missing
/// label, never to a value.
std::optional<double> f0_corr(const F0Track& est, const F0Track& ref);

}  // namespace universa
