#pragma once

#include <array>

#include "vowelmark/types.hpp"

namespace vowelmark {

inline constexpr int kNumHarmonics = 8;

struct HarmonicConfig {
  int periods_per_frame = 8;   // N_c
  int points_per_period = 512; // I
  double rel_epsilon = 1e-6;   // guard for the RelHp denominator
};

struct HarmonicFeatures {
  std::array<double, kNumHarmonics> h_mu;   // mean scaled amplitude, dB (<= 0)
  std::array<double, kNumHarmonics> h_sd;   // SD of scaled amplitude, dB
  std::array<double, kNumHarmonics> rel_h;  // 1 / (|h_mu| + h_sd + eps)
};

// Pitch-synchronous harmonic profile: frames of 8 consecutive periods with
// one-period overlap, band-limited resampling onto 4096 uniform points,
// Hamming window, DFT, harmonic bins p*512; amplitudes scaled by the global
// maximum (dB) before the per-harmonic statistics.
// Throws ComputeError with fewer than 9 cycles.
HarmonicFeatures harmonic_profile(const VoiceRecording& rec, const PeriodSegmentation& seg,
                                  const HarmonicConfig& cfg = {});

}  // namespace vowelmark
