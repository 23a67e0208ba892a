#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "vowelmark/types.hpp"

namespace vowelmark {

inline constexpr int kNumCepstra = 12;
inline constexpr int kNumMelBands = 20;

struct SpectralConfig {
  double mfcc_window = 0.025;
  double mfcc_hop = 0.010;
  double f_max = 4000.0;  // analysis band upper edge

  double envelope_rate = 8000.0;  // all-pole analysis rate
  int envelope_order = 24;
  int envelope_points = 256;
};

// Per-frame MFCC(1..12): Hamming-windowed magnitude spectrum over
// [0, f_max], averaged into 20 uniform mel bands, log, cosine transform.
std::vector<std::array<double, kNumCepstra>> mfcc_frames(const VoiceRecording& rec,
                                                         const SpectralConfig& cfg = {});

// Recording-level MFCC: mean across frames.
std::array<double, kNumCepstra> mfcc(const VoiceRecording& rec, const SpectralConfig& cfg = {});

// Recording-level delta MFCC: per-frame second-order regression deltas over
// +-2 frames, scalarized as the mean absolute delta per coefficient.
// Throws ComputeError with fewer than 5 frames.
std::array<double, kNumCepstra> delta_mfcc(
    std::span<const std::array<double, kNumCepstra>> frame_mfccs);

// The cosine-transform stage alone: MFCC(m) = sum_k ln S(k) cos(m(k-1/2)pi/M).
std::vector<double> mel_cepstrum(std::span<const double> band_energies, int order);

// All-pole spectral envelope sampled on a fixed frequency grid, in dB with
// the mean level removed (loudness-free shape).
struct SpectralEnvelope {
  std::vector<double> db;
  double f_lo = 0.0;
  double f_hi = 4000.0;

  double frequency_at(std::size_t k) const {
    return f_lo + (f_hi - f_lo) * static_cast<double>(k) / static_cast<double>(db.size() - 1);
  }
};

SpectralEnvelope spectral_envelope(const VoiceRecording& rec, const SpectralConfig& cfg = {});

// Mean l1 distance between two envelopes (dB domain).
double envelope_distance(const SpectralEnvelope& a, const SpectralEnvelope& b);

// Second-formant frequency from the envelope: second peak above 250 Hz,
// constrained to the vowel's plausibility band ([900, 1800] for /a/,
// [1500, 3200] for /i/). Empty when no peak is found.
std::optional<double> second_formant(const SpectralEnvelope& env, Vowel vowel);

}  // namespace vowelmark
