#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "universa/audio/wav.hpp"
#include "universa/metrics/annotate.hpp"
#include "universa/metrics/f0.hpp"
#include "universa/metrics/registry.hpp"
#include "universa/metrics/si_snr.hpp"
#include "universa/metrics/stoi.hpp"
#include "universa/rng.hpp"

using namespace universa;
namespace fs = std::filesystem;

namespace {

Waveform sine(double freq, double seconds, int rate = 16000, double amp = 0.5) {
  const int n = static_cast<int>(std::lround(seconds * rate));
  Arr s(n);
  for (int i = 0; i < n; ++i) {
    s[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  }
  return {s, rate};
}

Waveform white_noise(int n, uint64_t seed, double amp = 0.3) {
  Rng rng(seed);
  Arr s(n);
  for (int i = 0; i < n; ++i) s[i] = amp * rng.normal();
  const double peak = s.abs().maxCoeff();
  if (peak > 0.95) s *= 0.95 / peak;
  return {s, 16000};
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  const double cp = clean.samples.square().mean();
  const double np = noise.samples.square().mean();
  const double gain = std::sqrt(cp / (np * std::pow(10.0, snr_db / 10.0)));
  Waveform out = clean;
  out.samples += gain * noise.samples;
  return out;
}

// Speech-like test signal: harmonics with a slow pitch glide and envelope.
Waveform harmonic_voice(uint64_t seed, double seconds = 1.5) {
  Rng rng(seed);
  const int rate = 16000;
  const int n = static_cast<int>(seconds * rate);
  const double f0 = rng.uniform(120.0, 250.0);
  Arr s = Arr::Zero(n);
  for (int t = 0; t < n; ++t) {
    const double ts = static_cast<double>(t) / rate;
    const double phase = 2.0 * std::numbers::pi * f0 * (ts + 0.02 * ts * ts);
    const double env = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 1.3 * ts);
    s[t] = env * (std::sin(phase) + 0.5 * std::sin(2 * phase) +
                  0.3 * std::sin(3 * phase));
  }
  s *= 0.5 / s.abs().maxCoeff();
  return {s, rate};
}

}  // namespace

TEST_CASE("registry: the 11 default metrics in table order") {
  const auto reg = MetricRegistry::defaults();
  REQUIRE(reg.size() == 11);
  const std::vector<std::string> want = {"si_snr", "pesq", "dnsmos", "f0_corr",
                                         "mos", "utmos", "sheet", "wer",
                                         "stoi", "sbert", "spk_sim"};
  CHECK(reg.ids() == want);
  CHECK(reg.info("si_snr").clamp_lo == -30.0);
  CHECK(reg.info("si_snr").clamp_hi == 40.0);
  CHECK(reg.info("wer").clamp_hi == 2.0);
  CHECK(reg.info("pesq").range_hi == 4.5);
  CHECK(reg.info("dnsmos").ref_type == RefType::kNone);
  CHECK(reg.info("wer").ref_type == RefType::kText);
  CHECK(reg.info("stoi").ref_type == RefType::kSignal);
  // Restriction keeps relative order.
  const auto sub = reg.restrict({"mos", "si_snr"});
  CHECK(sub.ids() == std::vector<std::string>{"si_snr", "mos"});
  CHECK_THROWS_AS(reg.restrict({"bogus"}), ValidationError);
}

TEST_CASE("si_snr: identity and scaled copies clamp to +40") {
  const Waveform s = sine(220.0, 0.5);
  CHECK(si_snr(s, s) == 40.0);
  Waveform s2 = s;
  s2.samples *= 2.0;
  CHECK(si_snr(s2, s) == 40.0);
}

TEST_CASE("si_snr: orthogonal equal-power noise gives exactly 0 dB") {
  // Exact integer patterns: ref = +1,-1,+1,-1..., w = +1,+1,-1,-1...
  // Both zero-mean, orthogonal, equal power, so alpha = 1 and the
  // target/noise powers match.
  const int n = 1600;
  Arr ref(n), w(n);
  for (int i = 0; i < n; ++i) {
    ref[i] = (i % 2 == 0) ? 0.5 : -0.5;
    w[i] = (i % 4 < 2) ? 0.5 : -0.5;
  }
  const double v = si_snr(ref + w, ref);
  CHECK(std::abs(v - 0.0) < 1e-6);
}

TEST_CASE("si_snr: scale invariance of the estimate") {
  const Waveform ref = harmonic_voice(5);
  Waveform est = mix_at_snr(ref, white_noise(ref.length(), 77), 10.0);
  const double base = si_snr(est, ref);
  for (double a : {0.5, 2.0, 10.0}) {
    Waveform scaled = est;
    scaled.samples *= a;
    CHECK(std::abs(si_snr(scaled, ref) - base) < 1e-6);
  }
}

TEST_CASE("si_snr: adding the reference always beats plain noise") {
  // Permutation sensitivity: est = ref + noise correlates with ref,
  // est = noise alone does not.
  for (uint64_t seed : {1u, 2u, 3u}) {
    const Waveform ref = harmonic_voice(seed);
    const Waveform noise = white_noise(ref.length(), seed + 100);
    Waveform mixed = ref;
    mixed.samples += noise.samples;
    CHECK(si_snr(mixed, ref) > si_snr(noise, ref));
  }
}

TEST_CASE("si_snr: errors") {
  const Waveform s = sine(220.0, 0.5);
  Waveform shorter{s.samples.head(100), 16000};
  CHECK_THROWS_AS(si_snr(shorter, s), ValidationError);
  Waveform constant{Arr::Constant(s.length(), 0.25), 16000};
  CHECK_THROWS_AS(si_snr(s, constant), ValidationError);
}

TEST_CASE("stoi: self-intelligibility is maximal") {
  for (uint64_t seed : {10u, 11u, 12u}) {
    const Waveform s = harmonic_voice(seed);
    const double self = stoi(s, s);
    CHECK(self >= 0.999);
    // stoi(s, s) maximal among degraded versions
    const Waveform noisy = mix_at_snr(s, white_noise(s.length(), seed + 5), 0.0);
    CHECK(self >= stoi(noisy, s));
  }
}

TEST_CASE("stoi: strictly increasing in mixing SNR") {
  const Waveform clean = harmonic_voice(42, 2.0);
  const Waveform noise = white_noise(clean.length(), 43);
  double prev = -1.0;
  for (double snr : {-10.0, -5.0, 0.0, 5.0, 10.0, 20.0}) {
    const double v = stoi(mix_at_snr(clean, noise, snr), clean);
    CHECK(v > prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("stoi: uncorrelated noise scores low (20-seed empirical bound)") {
  const Waveform s = harmonic_voice(99, 1.2);
  double worst = -1.0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Waveform noise = white_noise(s.length(), 1000 + seed);
    worst = std::max(worst, stoi(noise, s));
  }
  CHECK(worst < 0.3);
}

TEST_CASE("stoi: too little signal after silence removal") {
  const Waveform blip = sine(440.0, 0.05);
  CHECK_THROWS_AS(stoi(blip, blip), ValidationError);
}

TEST_CASE("extract_f0: pure sine recovered within 2 Hz") {
  const Waveform s = sine(100.0, 1.0);
  const F0Track track = extract_f0(s);
  int voiced_good = 0;
  for (int t = 0; t < track.frames(); ++t) {
    if (track.voiced[static_cast<size_t>(t)] && track.f0_hz[t] >= 98.0 &&
        track.f0_hz[t] <= 102.0) {
      ++voiced_good;
    }
  }
  CHECK(voiced_good >= static_cast<int>(0.9 * track.frames()));
}

TEST_CASE("extract_f0: digital silence is entirely unvoiced") {
  Waveform w{Arr::Zero(16000), 16000};
  const F0Track track = extract_f0(w);
  for (int t = 0; t < track.frames(); ++t) {
    CHECK_FALSE(track.voiced[static_cast<size_t>(t)]);
    CHECK(track.f0_hz[t] == 0.0);
  }
}

TEST_CASE("extract_f0: white noise is mostly unvoiced (20 seeds)") {
  int voiced = 0, total = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Waveform w = white_noise(16000, 2000 + seed);
    const F0Track track = extract_f0(w);
    total += track.frames();
    for (bool v : track.voiced) voiced += v ? 1 : 0;
  }
  CHECK(voiced <= static_cast<int>(0.2 * total));
}

TEST_CASE("extract_f0: deterministic") {
  const Waveform s = harmonic_voice(7);
  const F0Track a = extract_f0(s);
  const F0Track b = extract_f0(s);
  CHECK((a.f0_hz - b.f0_hz).abs().maxCoeff() == 0.0);
  CHECK(a.voiced == b.voiced);
}

TEST_CASE("f0_corr: identity, shift and rescale invariance, reversal") {
  F0Track ref;
  ref.f0_hz = Arr(5);
  ref.f0_hz << 100, 110, 120, 0, 130;
  ref.voiced = {true, true, true, false, true};

  CHECK(*f0_corr(ref, ref) == doctest::Approx(1.0));

  F0Track shifted = ref;
  for (int i = 0; i < 5; ++i) {
    if (shifted.voiced[static_cast<size_t>(i)]) shifted.f0_hz[i] += 12.0;
  }
  CHECK(*f0_corr(shifted, ref) == doctest::Approx(1.0));

  F0Track scaled = ref;
  scaled.f0_hz *= 1.7;
  CHECK(*f0_corr(scaled, ref) == doctest::Approx(1.0));

  F0Track reversed;
  reversed.f0_hz = Arr(5);
  reversed.f0_hz << 120, 110, 100, 0, 0;
  reversed.voiced = {true, true, true, false, false};
  F0Track ref3;
  ref3.f0_hz = Arr(5);
  ref3.f0_hz << 100, 110, 120, 0, 0;
  ref3.voiced = {true, true, true, false, false};
  CHECK(*f0_corr(reversed, ref3) == doctest::Approx(-1.0));

  // Symmetry.
  CHECK(*f0_corr(reversed, ref3) == *f0_corr(ref3, reversed));
}

TEST_CASE("f0_corr: fewer than 2 co-voiced frames is undefined") {
  F0Track a, b;
  a.f0_hz = Arr(3);
  a.f0_hz << 100, 0, 0;
  a.voiced = {true, false, false};
  b.f0_hz = Arr(3);
  b.f0_hz << 100, 110, 0;
  b.voiced = {true, true, false};
  CHECK_FALSE(f0_corr(a, b).has_value());
  F0Track c = a;
  c.f0_hz = Arr(2);
  c.voiced = {false, false};
  CHECK_THROWS_AS(f0_corr(a, c), ValidationError);  // frame count mismatch
}

TEST_CASE("annotate: identical pair, trim policy, and error isolation") {
  const auto dir = fs::temp_directory_path() / "universa_test_annotate";
  fs::create_directories(dir);
  const Waveform v = harmonic_voice(3);
  const auto ref_path = (dir / "ref.wav").string();
  const auto same_path = (dir / "same.wav").string();
  write_wav(ref_path, v);
  write_wav(same_path, v);

  // Two samples longer: inside the 160-sample trim budget.
  Waveform longer{Arr::Zero(v.length() + 2), 16000};
  longer.samples.head(v.length()) = v.samples;
  const auto longer_path = (dir / "longer.wav").string();
  write_wav(longer_path, longer);

  const std::vector<std::pair<std::string, std::string>> pairs = {
      {same_path, ref_path},
      {longer_path, ref_path},
      {(dir / "missing.wav").string(), ref_path},
  };
  const auto results = annotate(pairs, 2);
  REQUIRE(results.size() == 3);

  CHECK(results[0].labels.at("si_snr") == 40.0);
  CHECK(results[0].labels.at("stoi") >= 0.999);
  CHECK(results[0].labels.at("f0_corr") == doctest::Approx(1.0));

  CHECK(results[1].labels.count("si_snr") == 1);  // trimmed, labels produced
  CHECK(results[1].labels.count("stoi") == 1);

  CHECK(results[2].labels.empty());  // missing file isolated, batch survived
  CHECK_FALSE(results[2].issues.empty());
}

TEST_CASE("annotate: oversized length mismatch is an error for that pair") {
  const auto dir = fs::temp_directory_path() / "universa_test_annotate";
  fs::create_directories(dir);
  const Waveform v = harmonic_voice(4);
  Waveform longer{Arr::Zero(v.length() + 500), 16000};
  longer.samples.head(v.length()) = v.samples;
  const auto a = (dir / "mismatch_a.wav").string();
  const auto b = (dir / "mismatch_b.wav").string();
  write_wav(a, longer);
  write_wav(b, v);
  const auto result = annotate_pair(a, b);
  CHECK(result.labels.empty());
  REQUIRE_FALSE(result.issues.empty());
  CHECK(result.issues[0].find("length mismatch") != std::string::npos);
}
