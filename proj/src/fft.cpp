#include "universa/audio/fft.hpp"

#include <cmath>
#include <numbers>

namespace universa {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_power_of_two(static_cast<int>(n))) {
    throw ValidationError("fft size must be a power of two, got " +
                          std::to_string(n));
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * std::numbers::pi / static_cast<double>(len) *
                 (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

std::vector<std::complex<double>> rfft(const Arr& x, int nfft) {
  if (x.size() > nfft) {
    throw ValidationError("rfft: signal longer than nfft");
  }
  std::vector<std::complex<double>> a(static_cast<size_t>(nfft));
  for (Eigen::Index i = 0; i < x.size(); ++i) a[static_cast<size_t>(i)] = x[i];
  fft_inplace(a);
  a.resize(static_cast<size_t>(nfft / 2 + 1));
  return a;
}

}  // namespace universa
