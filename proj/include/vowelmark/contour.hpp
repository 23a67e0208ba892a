#pragma once

#include <span>

#include "vowelmark/types.hpp"

namespace vowelmark {

// Phonatory frequency range in semitones: 12 log2(F0_high / F0_low) over
// voiced frames.
double pfr(const F0Contour& contour);

// Pitch period entropy. Semitone transform about f_low = mean(F0)/sqrt(2),
// order-2 whitening (covariance-method LP), residual histogram over 31 bins
// on [-1.5, 1.5] (out-of-range residuals clamped into the end bins), Shannon
// entropy base 2. Needs >= 2 s of voiced contour.
double ppe(const F0Contour& contour);

// Histogram + entropy stage alone (31 bins on [-1.5, 1.5], clamped ends).
double ppe_entropy(std::span<const double> residuals);

// Pathological vibrato index: F0 normalized by its mean, zero-phase 3rd
// order Butterworth band-pass [9, 14] Hz, Welch amplitude spectrum (1 s
// Hann windows, 95% overlap), summed over the bins inside [9, 14] Hz.
// Needs >= 2 s of voiced contour.
double pvi(const F0Contour& contour);

// Contour values with unvoiced gaps bridged by linear interpolation
// (leading/trailing unvoiced frames dropped). Shared by PPE and PVI.
std::vector<double> bridged_contour(const F0Contour& contour);

}  // namespace vowelmark
