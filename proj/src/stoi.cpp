#include "universa/metrics/stoi.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "universa/audio/fft.hpp"
#include "universa/audio/resample.hpp"

namespace universa {

namespace {

constexpr int kFs = 10000;
constexpr int kFrame = 256;
constexpr int kHop = 128;
constexpr int kNfft = 512;
constexpr int kBins = kNfft / 2 + 1;
constexpr int kBands = 15;
constexpr double kBandStartHz = 150.0;
constexpr int kSegFrames = 30;
constexpr double kDynRangeDb = 40.0;
// -15 dB lower SDR bound: clip factor 1 + 10^(15/20).
const double kClipFactor = 1.0 + std::pow(10.0, 15.0 / 20.0);

// Interior (MATLAB-style) Hann window, no zero endpoints.
Arr hanning_interior(int n) {
  Arr w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 1) / (n + 1));
  }
  return w;
}

// Drops frames of `ref` quieter than (max - 40 dB) and compacts both
// signals by overlap-adding the retained windowed frames.
void remove_silent_frames(Arr& est, Arr& ref) {
  const Arr w = hanning_interior(kFrame);
  const int n_frames =
      ref.size() >= kFrame
          ? static_cast<int>(1 + (ref.size() - kFrame) / kHop)
          : 0;
  std::vector<int> kept;
  double max_db = -1e30;
  std::vector<double> db(static_cast<size_t>(std::max(n_frames, 0)));
  for (int j = 0; j < n_frames; ++j) {
    double e = (ref.segment(static_cast<Eigen::Index>(j) * kHop, kFrame) * w)
                   .square()
                   .sum();
    db[static_cast<size_t>(j)] =
        e > 0.0 ? 10.0 * std::log10(e / kFrame) : -1e30;
    max_db = std::max(max_db, db[static_cast<size_t>(j)]);
  }
  for (int j = 0; j < n_frames; ++j) {
    if (db[static_cast<size_t>(j)] > max_db - kDynRangeDb) kept.push_back(j);
  }
  if (kept.empty()) {
    est.resize(0);
    ref.resize(0);
    return;
  }
  const Eigen::Index out_len =
      static_cast<Eigen::Index>(kept.size() - 1) * kHop + kFrame;
  Arr est_out = Arr::Zero(out_len);
  Arr ref_out = Arr::Zero(out_len);
  for (size_t q = 0; q < kept.size(); ++q) {
    const Eigen::Index src = static_cast<Eigen::Index>(kept[q]) * kHop;
    const Eigen::Index dst = static_cast<Eigen::Index>(q) * kHop;
    est_out.segment(dst, kFrame) += est.segment(src, kFrame) * w;
    ref_out.segment(dst, kFrame) += ref.segment(src, kFrame) * w;
  }
  est = std::move(est_out);
  ref = std::move(ref_out);
}

// One-third-octave band energies: rows are bands, columns are frames.
Mat band_magnitudes(const Arr& x, int n_frames) {
  const Arr w = hanning_interior(kFrame);
  Mat power(kBins, n_frames);
  for (int m = 0; m < n_frames; ++m) {
    Arr frame = x.segment(static_cast<Eigen::Index>(m) * kHop, kFrame) * w;
    auto spec = rfft(frame, kNfft);
    for (int k = 0; k < kBins; ++k) {
      power(k, m) = std::norm(spec[static_cast<size_t>(k)]);
    }
  }

  // Band edges at cf * 2^(+-1/6); each FFT bin joins the band whose edge
  // it sits nearest to, matching the published band assignment.
  Mat bands = Mat::Zero(kBands, n_frames);
  for (int i = 0; i < kBands; ++i) {
    const double cf = kBandStartHz * std::pow(2.0, i / 3.0);
    const double fl = cf * std::pow(2.0, -1.0 / 6.0);
    const double fr = cf * std::pow(2.0, 1.0 / 6.0);
    int b1 = 0, b2 = 0;
    double d1 = 1e30, d2 = 1e30;
    for (int k = 0; k < kBins; ++k) {
      const double f = static_cast<double>(k) * kFs / kNfft;
      if (std::abs(f - fl) < d1) { d1 = std::abs(f - fl); b1 = k; }
      if (std::abs(f - fr) < d2) { d2 = std::abs(f - fr); b2 = k; }
    }
    for (int k = b1; k < b2; ++k) bands.row(i) += power.row(k);
  }
  return bands.cwiseSqrt();
}

double pearson(const Vec& a, const Vec& b) {
  Vec x = a.array() - a.mean();
  Vec y = b.array() - b.mean();
  const double denom = std::sqrt(x.squaredNorm() * y.squaredNorm());
  if (denom <= 0.0) return 0.0;  // flat segment carries no intelligibility cue
  return x.dot(y) / denom;
}

}  // namespace

double stoi(const Waveform& est, const Waveform& ref) {
  if (est.samples.size() != ref.samples.size()) {
    throw ValidationError("stoi: length mismatch");
  }
  if (est.sample_rate != ref.sample_rate) {
    throw ValidationError("stoi: sample rate mismatch");
  }

  Arr x = resample(ref, kFs).samples;
  Arr y = resample(est, kFs).samples;
  remove_silent_frames(y, x);

  const int n_frames =
      x.size() >= kFrame ? static_cast<int>(1 + (x.size() - kFrame) / kHop) : 0;
  if (n_frames < kSegFrames) {
    throw ValidationError(
        "stoi: fewer than 30 analysis frames after silence removal");
  }

  const Mat xb = band_magnitudes(x, n_frames);
  const Mat yb = band_magnitudes(y, n_frames);

  double sum = 0.0;
  int count = 0;
  for (int m = kSegFrames - 1; m < n_frames; ++m) {
    const Mat xs = xb.middleCols(m - kSegFrames + 1, kSegFrames);
    const Mat ys = yb.middleCols(m - kSegFrames + 1, kSegFrames);
    for (int j = 0; j < kBands; ++j) {
      const double xe = xs.row(j).squaredNorm();
      const double ye = ys.row(j).squaredNorm();
      const double alpha = ye > 0.0 ? std::sqrt(xe / ye) : 0.0;
      Vec clipped(kSegFrames);
      for (int k = 0; k < kSegFrames; ++k) {
        clipped[k] = std::min(alpha * ys(j, k), xs(j, k) * kClipFactor);
      }
      sum += pearson(xs.row(j).transpose(), clipped);
      ++count;
    }
  }
  return sum / count;
}

}  // namespace universa
