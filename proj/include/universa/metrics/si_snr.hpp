#pragma once

#include "universa/audio/wav.hpp"

namespace universa {

inline constexpr double kSiSnrClampLo = -30.0;
inline constexpr double kSiSnrClampHi = 40.0;

/// Scale-invariant SNR in dB, clamped to [-30, 40]. Both signals are
/// mean-removed first; the reference is rescaled by the projection
/// coefficient alpha = <est,ref>/<ref,ref> before the energy ratio.
double si_snr(const Arr& est, const Arr& ref);
double si_snr(const Waveform& est, const Waveform& ref);

}  // namespace universa
