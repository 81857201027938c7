#include "universa/audio/stft.hpp"

#include <cmath>
#include <numbers>

#include "universa/audio/fft.hpp"

namespace universa {

Arr hann_window(int n) {
  Arr w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

int frame_count(int64_t length, int window_samples, int hop_samples) {
  if (length < window_samples) return 0;
  return static_cast<int>(1 + (length - window_samples) / hop_samples);
}

ComplexSpectrogram stft(const Waveform& w, double window_s, double hop_s,
                        int nfft) {
  const int win = static_cast<int>(std::lround(window_s * w.sample_rate));
  const int hop = static_cast<int>(std::lround(hop_s * w.sample_rate));
  if (win <= 0 || hop <= 0) throw ValidationError("stft: window/hop must be positive");
  if (nfft < win) throw ValidationError("stft: nfft must be >= window samples");
  if (!is_power_of_two(nfft)) throw ValidationError("stft: nfft must be a power of two");
  const int frames = frame_count(w.samples.size(), win, hop);
  if (frames < 1) {
    throw ValidationError("stft: waveform shorter than one window (" +
                          std::to_string(w.samples.size()) + " < " +
                          std::to_string(win) + " samples)");
  }

  const Arr window = hann_window(win);
  ComplexSpectrogram spec;
  spec.window_samples = win;
  spec.hop_samples = hop;
  spec.nfft = nfft;
  spec.values.resize(frames, nfft / 2 + 1);
  for (int f = 0; f < frames; ++f) {
    Arr frame = w.samples.segment(static_cast<Eigen::Index>(f) * hop, win) * window;
    auto bins = rfft(frame, nfft);
    for (int k = 0; k <= nfft / 2; ++k) {
      spec.values(f, k) = bins[static_cast<size_t>(k)];
    }
  }
  return spec;
}

}  // namespace universa
