#pragma once

#include "universa/audio/wav.hpp"

namespace universa {

/// STFT output: frames x (nfft/2 + 1) complex bins.
struct ComplexSpectrogram {
  CMat values;
  int window_samples = 0;
  int hop_samples = 0;
  int nfft = 0;

  int frames() const { return static_cast<int>(values.rows()); }
  int bins() const { return static_cast<int>(values.cols()); }
};

/// Periodic Hann window of length n.
Arr hann_window(int n);

/// Frame count for the no-padding framing policy used everywhere in this
/// codebase: 1 + floor((len - win) / hop), trailing partial frame dropped.
int frame_count(int64_t length, int window_samples, int hop_samples);

/// Hann-windowed STFT with no centering/padding. nfft must be a power of
/// two and at least the window length.
ComplexSpectrogram stft(const Waveform& w, double window_s, double hop_s,
                        int nfft);

}  // namespace universa
