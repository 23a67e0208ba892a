#pragma once

#include <span>

#include "vowelmark/types.hpp"

namespace vowelmark {

// Frequency/amplitude perturbation measures. All results are percentages.
// Windowed quotients (ppq/apq) return NaN when the sequence is shorter than
// the window; that entry is treated as missing downstream.

double jitter_local(std::span<const double> t0);
double jitter_ppq(std::span<const double> t0, int window_length);
double shimmer_local(std::span<const double> amp);
double shimmer_apq(std::span<const double> amp, int window_length);

// Directional perturbation factor: percentage of period-change sign
// reversals. sign(0) counts as 0; the sum runs over indices where both
// consecutive differences exist.
double dfp(std::span<const double> t0);

struct PerturbationFeatures {
  double j_loc, j_ppq3, j_ppq5, j_ppq55;
  double s_loc, s_apq3, s_apq5, s_apq11, s_apq55;
  double dfp;
};

PerturbationFeatures perturbation_features(const PeriodSegmentation& seg);

}  // namespace vowelmark
