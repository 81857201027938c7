#include "universa/data/synth.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "universa/audio/wav.hpp"
#include "universa/metrics/annotate.hpp"
#include "universa/metrics/f0.hpp"
#include "universa/metrics/si_snr.hpp"
#include "universa/metrics/stoi.hpp"
#include "universa/rng.hpp"

namespace universa {

namespace {

constexpr int kRate = 16000;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const char* kConsonants[] = {"b", "d", "k", "l", "m", "n", "p", "r", "s", "t"};
const char* kVowels[] = {"a", "e", "i", "o", "u"};

std::string random_word(Rng& rng) {
  const int syllables = 2 + static_cast<int>(rng.below(3));
  std::string w;
  for (int s = 0; s < syllables; ++s) {
    w += kConsonants[rng.below(std::size(kConsonants))];
    w += kVowels[rng.below(std::size(kVowels))];
  }
  return w;
}

}  // namespace

double pseudo_label(const std::string& metric_id, double snr_db, double f0_hz) {
  if (metric_id == "pesq") return 1.0 + 3.5 * sigmoid(snr_db / 8.0);
  if (metric_id == "dnsmos") return 1.0 + 4.0 * sigmoid(snr_db / 12.0);
  if (metric_id == "mos") return 1.0 + 4.0 * sigmoid(snr_db / 10.0);
  if (metric_id == "utmos") return 1.0 + 4.0 * sigmoid(snr_db / 9.0);
  if (metric_id == "sheet") return 1.0 + 4.0 * sigmoid(snr_db / 11.0);
  if (metric_id == "wer") return 2.0 * sigmoid(-snr_db / 10.0);
  if (metric_id == "sbert") return sigmoid(snr_db / 7.0);
  if (metric_id == "spk_sim") return std::tanh((f0_hz - 200.0) / 100.0);
  throw ValidationError("no pseudo-label formula for metric: " + metric_id);
}

Manifest synth_corpus(const SynthConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.count < 1) throw ValidationError("synth: count must be >= 1");
  fs::create_directories(cfg.out_dir);

  Manifest manifest;
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng(mix_seed(cfg.seed, static_cast<uint64_t>(i)));

    const double dur = rng.uniform(1.0, 3.0);
    const int n = static_cast<int>(std::lround(dur * kRate));
    const double f0 = rng.uniform(100.0, 300.0);
    const int harmonics = 2 + static_cast<int>(rng.below(3));

    std::vector<double> amps(static_cast<size_t>(harmonics));
    std::vector<double> phases(static_cast<size_t>(harmonics));
    amps[0] = 1.0;
    phases[0] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int k = 1; k < harmonics; ++k) {
      amps[static_cast<size_t>(k)] = rng.uniform(0.25, 0.8);
      phases[static_cast<size_t>(k)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }

    // 1% vibrato at 4 Hz keeps the pitch contour non-constant.
    constexpr double kVibratoDepth = 0.01;
    constexpr double kVibratoHz = 4.0;
    Arr clean = Arr::Zero(n);
    for (int t = 0; t < n; ++t) {
      const double ts = static_cast<double>(t) / kRate;
      const double phase =
          2.0 * std::numbers::pi * f0 * ts -
          (f0 * kVibratoDepth / kVibratoHz) *
              std::cos(2.0 * std::numbers::pi * kVibratoHz * ts);
      const double env =
          std::min({1.0, ts / 0.05, (dur - ts) / 0.1});  // attack/release ramps
      double v = 0.0;
      for (int k = 0; k < harmonics; ++k) {
        v += amps[static_cast<size_t>(k)] *
             std::sin((k + 1) * phase + phases[static_cast<size_t>(k)]);
      }
      clean[t] = std::max(env, 0.0) * v;
    }
    clean *= 0.5 / clean.abs().maxCoeff();

    const bool identical = (i % cfg.clean_every) == 0;
    double snr_db = std::numeric_limits<double>::infinity();
    Arr noisy = clean;
    if (!identical) {
      snr_db = rng.uniform(cfg.snr_lo_db, cfg.snr_hi_db);
      Arr noise(n);
      for (int t = 0; t < n; ++t) noise[t] = rng.normal();
      const double clean_power = clean.square().mean();
      const double noise_power = noise.square().mean();
      const double gain = std::sqrt(
          clean_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
      noisy = clean + gain * noise;
      const double peak = noisy.abs().maxCoeff();
      if (peak > 0.95) noisy *= 0.95 / peak;
    }

    char id[16];
    std::snprintf(id, sizeof(id), "u%04d", i);
    const std::string noisy_name = std::string(id) + ".wav";
    const std::string clean_name = std::string(id) + "_ref.wav";
    Waveform noisy_wav{noisy, kRate};
    Waveform clean_wav{clean, kRate};
    write_wav((fs::path(cfg.out_dir) / noisy_name).string(), noisy_wav);
    write_wav((fs::path(cfg.out_dir) / clean_name).string(), clean_wav);

    UtteranceRecord rec;
    rec.id = id;
    rec.audio = (fs::path(cfg.out_dir) / noisy_name).string();
    rec.ref_audio = (fs::path(cfg.out_dir) / clean_name).string();
    const int n_words = 3 + static_cast<int>(rng.below(4));
    std::string text;
    std::vector<std::string> words;
    for (int k = 0; k < n_words; ++k) {
      words.push_back(random_word(rng));
      if (k) text += ' ';
      text += words.back();
    }
    rec.text = text;
    // Pseudo transcription: an "ASR output" that may drop words.
    std::string pseudo;
    for (const auto& w : words) {
      if (rng.uniform() < 0.9 || pseudo.empty()) {
        if (!pseudo.empty()) pseudo += ' ';
        pseudo += w;
      }
    }
    rec.pseudo_text = pseudo;

    rec.metrics["si_snr"] = si_snr(noisy_wav, clean_wav);
    rec.metrics["stoi"] = stoi(noisy_wav, clean_wav);
    if (auto corr = f0_corr(extract_f0(noisy_wav), extract_f0(clean_wav))) {
      rec.metrics["f0_corr"] = *corr;
    }
    for (const char* m :
         {"pesq", "dnsmos", "mos", "utmos", "sheet", "wer", "sbert", "spk_sim"}) {
      rec.metrics[m] = pseudo_label(m, snr_db, f0);
    }
    manifest.records.push_back(std::move(rec));
  }

  save_manifest(manifest, (fs::path(cfg.out_dir) / "manifest.jsonl").string());
  return manifest;
}

}  // namespace universa
