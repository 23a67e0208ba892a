#pragma once

#include <string>

#include "vowelmark/types.hpp"

namespace vowelmark {

struct PitchConfig {
  double f_min = 60.0;    // Hz, search band
  double f_max = 450.0;
  double step = 0.005;    // contour hop, seconds
  double window = 0.040;  // correlation window, seconds
  double voicing_threshold = 0.5;  // normalized correlation peak
  double octave_cost = 0.2;        // Viterbi transition cost per octave jump
  double min_voiced_fraction = 0.5;
};

// Estimates the F0 contour at the configured fixed step. Normalized
// cross-correlation candidates per frame, Viterbi-smoothed with an
// octave-jump penalty; frames whose chosen peak falls below the voicing
// threshold are masked unvoiced.
// Throws ComputeError when fewer than min_voiced_fraction of frames are
// voiced ("unvoiceable recording").
F0Contour track_f0(const VoiceRecording& rec, const PitchConfig& cfg = {});

// Splits the waveform into fundamental periods. Seeds at the strongest
// positive waveform peak, marches both directions using the local contour
// period, refines each boundary by waveform matching (normalized
// cross-correlation against the previous cycle within +-25% of T0), and
// snaps boundaries to the positive-peak landmark of the cycle.
// Throws ComputeError when fewer than 30 cycles are found.
PeriodSegmentation segment_periods(const VoiceRecording& rec, const F0Contour& contour,
                                   const PitchConfig& cfg = {});

// Debug dumps (CSV) for manual inspection.
void dump_contour(const F0Contour& contour, const std::string& path);
void dump_segmentation(const PeriodSegmentation& seg, double sample_rate, const std::string& path);

}  // namespace vowelmark
