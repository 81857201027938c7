#pragma once

#include "universa/audio/wav.hpp"

namespace universa {

/// Band-limited sample-rate conversion with a Hann-windowed sinc kernel.
/// Output length is round(len * target / source).
Waveform resample(const Waveform& w, int target_rate);

}  // namespace universa
