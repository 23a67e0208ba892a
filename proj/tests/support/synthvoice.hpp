#pragma once

// Synthetic sustained-phonation signals for tests and the demo corpus.
// Source-filter construction: band-limited glottal pulse train with
// controllable pitch modulations (vibrato, flutter, wander), cycle jitter
// and shimmer, formant resonators, spectral tilt and aspiration noise.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vowelmark/types.hpp"

namespace vowelmark::synth {

struct VoiceParams {
  double sample_rate = 44100.0;
  double duration = 4.0;
  double f0 = 120.0;

  // Pitch modulation depths in cents (100 cents = 1 semitone).
  double vibrato_hz = 5.0;
  double vibrato_cents = 8.0;
  double flutter_hz = 11.0;   // pathological band is 9-14 Hz
  double flutter_cents = 0.0;
  double wander_cents = 0.0;  // slow random pitch wander (RMS)

  double jitter_pct = 0.2;    // per-cycle period perturbation (SD, percent)
  double shimmer_pct = 1.0;   // per-cycle amplitude perturbation (SD, percent)

  double am_hz = 3.0;         // slow amplitude modulation of the source
  double am_depth = 0.0;

  std::array<double, 4> formants{700.0, 1100.0, 2500.0, 3400.0};
  std::array<double, 4> bandwidths{90.0, 110.0, 170.0, 220.0};

  double tilt_corner_hz = 600.0;  // glottal low-pass corner (two poles)
  double noise_snr_db = 30.0;     // voiced-to-aspiration ratio; >= 200 disables noise

  double peak = 0.45;
  std::uint64_t seed = 1;
};

std::vector<double> phonation(const VoiceParams& p);

// Simple deterministic signals used across the unit tests.
std::vector<double> harmonic_train(double sample_rate, double duration, double f0,
                                   int n_harmonics, double amplitude = 0.5);
std::vector<double> harmonic_sum(double sample_rate, double duration, double f0,
                                 const std::vector<double>& harmonic_amps);
std::vector<double> falling_sawtooth(double sample_rate, double duration, int period_samples,
                                     double amplitude = 0.5);
std::vector<double> fm_sine(double sample_rate, double duration, double f0, double mod_hz,
                            double mod_depth);
std::vector<double> linear_glide(double sample_rate, double duration, double f_start,
                                 double f_end);
std::vector<double> white_noise(double sample_rate, double duration, std::uint64_t seed,
                                double amplitude = 0.3);

VoiceRecording as_recording(std::vector<double> samples, double sample_rate,
                            const std::string& subject = "synth", Vowel vowel = Vowel::A,
                            Label label = Label::HC);

// ---------------------------------------------------------------------------
// Synthetic corpus with the same structure as the study database: 64
// subjects (33 HC, 31 ALS of which 12 mild "early" cases), two vowels each.
// Writes 16-bit WAVs under <dir>/als and <dir>/norm plus manifest.csv and
// manifest_early.csv (the 45-speaker reduced set: all HC + early ALS).

struct CorpusPaths {
  std::string manifest;
  std::string early_manifest;
};

CorpusPaths make_demo_corpus(const std::string& dir, std::uint64_t seed = 20200131,
                             int n_hc = 33, int n_als = 31, int n_early = 12);

}  // namespace vowelmark::synth
