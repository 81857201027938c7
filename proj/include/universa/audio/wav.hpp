#pragma once

#include <string>

#include "universa/common.hpp"

namespace universa {

/// Mono audio signal with samples in [-1, 1].
struct Waveform {
  Arr samples;
  int sample_rate = 0;

  int length() const { return static_cast<int>(samples.size()); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Reads a RIFF/WAVE file. Accepts mono PCM16 and IEEE float32 only;
/// multi-channel input is rejected rather than downmixed.
Waveform load_wav(const std::string& path);

/// Writes mono PCM16 little-endian. Samples must already be in [-1, 1];
/// clipping is refused so that level bugs surface at the caller.
void write_wav(const std::string& path, const Waveform& w);

}  // namespace universa
