#pragma once

#include "universa/audio/wav.hpp"

namespace universa {

/// Short-time objective intelligibility in [0, 1].
///
/// Pipeline: resample both signals to 10 kHz; drop frames more than 40 dB
/// below the loudest reference frame (256-sample frames, 128 hop); 512-point
/// Hann STFT; 15 one-third-octave bands starting at 150 Hz; per 30-frame
/// segment and band, normalize the degraded signal to the reference energy,
/// clip at a -15 dB SDR bound, and correlate; the score is the grand mean.
/// Throws if fewer than 30 analysis frames remain after silence removal.
double stoi(const Waveform& est, const Waveform& ref);

}  // namespace universa
