#pragma once

#include <vector>

#include "vowelmark/types.hpp"

namespace vowelmark {

struct NoiseConfig {
  // HNR framing; the lag band matches the pitch search band.
  double hnr_window = 0.040;
  double hnr_hop = 0.010;
  double f_min = 60.0;
  double f_max = 450.0;
  double hnr_floor_db = -20.0;
  double hnr_ceil_db = 60.0;

  // GNE procedure constants.
  double gne_rate = 8000.0;
  double gne_window = 0.030;
  double gne_hop = 0.010;
  int gne_lpc_order = 10;
  double gne_bandwidth = 1000.0;
  double gne_max_lag = 0.0003;  // envelope cross-correlation lag range, seconds
};

// Harmonics-to-noise ratio in dB, averaged over voiced frames. Per frame the
// normalized autocorrelation (window-ACF corrected) is searched for its
// highest local maximum in the pitch lag band; HNR = 10 log10(AC/(1-AC)).
// Throws ComputeError when the contour marks no frame voiced.
double hnr(const VoiceRecording& rec, const F0Contour& contour, const NoiseConfig& cfg = {});

struct GneResult {
  double mean = 0.0;
  double sd = 0.0;
};

// Glottal-to-noise excitation ratio: per 30 ms frame (10 ms hop) at 8 kHz,
// LP residual -> Hilbert envelopes of the 500/1500/2500 Hz bands -> maximum
// of the pairwise envelope cross-correlations. Returns mean and SD over
// frames.
GneResult gne(const VoiceRecording& rec, const NoiseConfig& cfg = {});

// Per-frame GNE values (exposed for tests and diagnostics).
std::vector<double> gne_frames(const VoiceRecording& rec, const NoiseConfig& cfg = {});

}  // namespace vowelmark
