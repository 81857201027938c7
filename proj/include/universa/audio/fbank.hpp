#pragma once

#include "universa/audio/wav.hpp"

namespace universa {

/// Frame-major feature matrix (frames x dims).
struct FeatureMatrix {
  Mat values;
  double frame_shift_s = 0.0;
  double frame_length_s = 0.0;

  int frames() const { return static_cast<int>(values.rows()); }
  int dims() const { return static_cast<int>(values.cols()); }
};

struct FbankConfig {
  int num_mels = 80;
  double window_s = 0.025;
  double hop_s = 0.010;
  int nfft = 512;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double floor_energy = 1e-10;
};

/// HTK-scale mel: 2595 * log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filters over the power spectrum; returns (num_mels x bins).
Mat mel_filterbank(const FbankConfig& cfg, int sample_rate);

/// Center frequencies of the mel filters in Hz (strictly increasing).
Vec mel_center_frequencies(const FbankConfig& cfg);

/// Log-mel filterbank features: 80 mel bins over 25 ms Hann frames with a
/// 10 ms shift, natural log with an energy floor. Input must be 16 kHz.
FeatureMatrix log_mel_fbank(const Waveform& w, const FbankConfig& cfg = {});

}  // namespace universa
