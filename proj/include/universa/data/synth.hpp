#pragma once

#include <string>

#include "universa/data/manifest.hpp"

namespace universa {

/// Synthetic desk-scale corpus: 1-3 s harmonic complexes (2-4 harmonics of
/// a random f0 in 100-300 Hz, amplitude envelope, gentle vibrato so pitch
/// contours are never constant) mixed with white noise at a known SNR.
/// Every clean_every-th record keeps noisy == clean. si_snr / stoi /
/// f0_corr labels come from the oracle implementations; the eight external
/// metrics get deterministic pseudo-labels (see pseudo_label).
struct SynthConfig {
  int count = 64;
  uint64_t seed = 0;
  std::string out_dir;
  double snr_lo_db = 8.0;
  double snr_hi_db = 28.0;
  int clean_every = 8;
};

/// Documented pseudo-label functions of mixing SNR and f0, all monotone:
///   pesq    = 1 + 3.5*sigmoid(snr/8)       mos   = 1 + 4*sigmoid(snr/10)
///   dnsmos  = 1 + 4*sigmoid(snr/12)        utmos = 1 + 4*sigmoid(snr/9)
///   sheet   = 1 + 4*sigmoid(snr/11)        wer   = 2*sigmoid(-snr/10)
///   sbert   = sigmoid(snr/7)               spk_sim = tanh((f0-200)/100)
/// snr may be +inf (identical pair).
double pseudo_label(const std::string& metric_id, double snr_db, double f0_hz);

/// Generates wav pairs plus manifest.jsonl under cfg.out_dir and returns
/// the manifest. Bit-exact for a given seed; record i depends only on
/// (seed, i).
Manifest synth_corpus(const SynthConfig& cfg);

}  // namespace universa
