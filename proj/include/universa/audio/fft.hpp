#pragma once

#include <complex>
#include <vector>

#include "universa/common.hpp"

namespace universa {

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false);

/// DFT of a real signal zero-padded to nfft; returns the nfft/2+1
/// non-redundant bins.
std::vector<std::complex<double>> rfft(const Arr& x, int nfft);

bool is_power_of_two(int n);

}  // namespace universa
