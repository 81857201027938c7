#include "universa/audio/fbank.hpp"

#include <cmath>

#include "universa/audio/stft.hpp"

namespace universa {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Vec mel_center_frequencies(const FbankConfig& cfg) {
  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  Vec centers(cfg.num_mels);
  for (int m = 0; m < cfg.num_mels; ++m) {
    double mel = mel_lo + (mel_hi - mel_lo) * (m + 1) / (cfg.num_mels + 1);
    centers[m] = mel_to_hz(mel);
  }
  return centers;
}

Mat mel_filterbank(const FbankConfig& cfg, int sample_rate) {
  const int bins = cfg.nfft / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  // num_mels + 2 edge points, evenly spaced on the mel axis.
  Vec edges(cfg.num_mels + 2);
  for (int i = 0; i < cfg.num_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.num_mels + 1));
  }
  Mat fb = Mat::Zero(cfg.num_mels, bins);
  for (int m = 0; m < cfg.num_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / cfg.nfft;
      if (f > left && f < center) {
        fb(m, k) = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        fb(m, k) = (right - f) / (right - center);
      }
    }
  }
  return fb;
}

FeatureMatrix log_mel_fbank(const Waveform& w, const FbankConfig& cfg) {
  if (w.sample_rate != 16000) {
    throw ValidationError("log_mel_fbank expects 16 kHz input, got " +
                          std::to_string(w.sample_rate) + " Hz");
  }
  ComplexSpectrogram spec;
  try {
    spec = stft(w, cfg.window_s, cfg.hop_s, cfg.nfft);
  } catch (const ValidationError&) {
    throw ValidationError("log_mel_fbank: waveform shorter than one 25 ms window");
  }
  const Mat fb = mel_filterbank(cfg, w.sample_rate);
  Mat power = spec.values.cwiseAbs2();
  FeatureMatrix feat;
  feat.frame_shift_s = cfg.hop_s;
  feat.frame_length_s = cfg.window_s;
  feat.values = (power * fb.transpose())
                    .cwiseMax(cfg.floor_energy)
                    .array()
                    .log()
                    .matrix();
  return feat;
}

}  // namespace universa
