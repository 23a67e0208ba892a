#include "vowelmark/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "vowelmark/dsp.hpp"
#include "vowelmark/util.hpp"

namespace vowelmark {

HarmonicFeatures harmonic_profile(const VoiceRecording& rec, const PeriodSegmentation& seg,
                                  const HarmonicConfig& cfg) {
  const int nc = cfg.periods_per_frame;
  const int hop = nc - 1;  // one-period overlap
  const std::size_t n_cycles = seg.cycles();
  if (n_cycles < static_cast<std::size_t>(nc) + 1) {
    throw ComputeError("harmonic_profile: needs at least " + std::to_string(nc + 1) + " cycles");
  }

  const std::size_t frame_points = static_cast<std::size_t>(cfg.points_per_period) *
                                   static_cast<std::size_t>(nc);

  // Frame i spans periods [hop*i, hop*i + nc).
  std::vector<std::array<double, kNumHarmonics>> amps;
  const auto window = dsp::hamming_window(frame_points);
  std::vector<double> positions(frame_points);
  std::vector<double> frame(frame_points);

  for (std::size_t start = 0; start + static_cast<std::size_t>(nc) < seg.boundaries.size();
       start += static_cast<std::size_t>(hop)) {
    const double b0 = static_cast<double>(seg.boundaries[start]);
    const double b1 = static_cast<double>(seg.boundaries[start + static_cast<std::size_t>(nc)]);
    const double span = b1 - b0;

    // Uniform grid over exactly nc periods, endpoint excluded so the grid is
    // periodic for a perfectly periodic signal.
    for (std::size_t k = 0; k < frame_points; ++k) {
      positions[k] = b0 + span * static_cast<double>(k) / static_cast<double>(frame_points);
    }
    auto interp = dsp::interpolate_sinc(rec.samples, positions);
    for (std::size_t k = 0; k < frame_points; ++k) frame[k] = interp[k] * window[k];

    auto spec = dsp::fft(std::span<const double>(frame));
    // Each period maps to points_per_period grid samples, so the p-th
    // harmonic of the voice falls on DFT bin p * periods_per_frame.
    std::array<double, kNumHarmonics> h;
    for (int p = 1; p <= kNumHarmonics; ++p) {
      h[static_cast<std::size_t>(p - 1)] = std::abs(spec[static_cast<std::size_t>(p * nc)]);
    }
    amps.push_back(h);
  }

  if (amps.empty()) throw ComputeError("harmonic_profile: no frames");

  double global_max = 0.0;
  for (const auto& h : amps) {
    for (double v : h) global_max = std::max(global_max, v);
  }
  if (global_max <= 0.0) throw ComputeError("harmonic_profile: silent frames");

  HarmonicFeatures out{};
  const double n_frames = static_cast<double>(amps.size());
  for (int p = 0; p < kNumHarmonics; ++p) {
    double mu = 0.0;
    for (const auto& h : amps) {
      const double scaled = 20.0 * std::log10(std::max(h[static_cast<std::size_t>(p)], 1e-300) / global_max);
      mu += scaled;
    }
    mu /= n_frames;
    double var = 0.0;
    for (const auto& h : amps) {
      const double scaled = 20.0 * std::log10(std::max(h[static_cast<std::size_t>(p)], 1e-300) / global_max);
      var += (scaled - mu) * (scaled - mu);
    }
    var /= n_frames;
    out.h_mu[static_cast<std::size_t>(p)] = mu;
    out.h_sd[static_cast<std::size_t>(p)] = std::sqrt(var);
    out.rel_h[static_cast<std::size_t>(p)] = 1.0 / (std::abs(mu) + std::sqrt(var) + cfg.rel_epsilon);
  }
  return out;
}

}  // namespace vowelmark
