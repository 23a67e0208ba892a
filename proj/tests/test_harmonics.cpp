#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "synthvoice.hpp"
#include "vowelmark/dsp.hpp"
#include "vowelmark/harmonics.hpp"
#include "vowelmark/util.hpp"

using namespace vowelmark;
namespace synth = vowelmark::synth;

namespace {
constexpr double kPi = std::numbers::pi;

// Exact boundaries for a signal with integer period P.
PeriodSegmentation exact_segmentation(std::size_t n_samples, std::size_t period, double fs,
                                      const std::vector<double>& samples) {
  PeriodSegmentation seg;
  for (std::size_t b = 0; b + period <= n_samples; b += period) seg.boundaries.push_back(b);
  seg.t0.assign(seg.boundaries.size() - 1, static_cast<double>(period) / fs);
  seg.amp.resize(seg.t0.size());
  for (std::size_t i = 0; i < seg.t0.size(); ++i) {
    double a = 0.0;
    for (std::size_t j = seg.boundaries[i]; j < seg.boundaries[i + 1]; ++j) {
      a = std::max(a, std::abs(samples[j]));
    }
    seg.amp[i] = a;
  }
  return seg;
}
}  // namespace

TEST_SUITE("harmonics") {

TEST_CASE("pure sinusoid: H1 dominates, stationarity gives zero spread") {
  const double fs = 44100;
  const std::size_t period = 300;  // 147 Hz
  const double f0 = fs / static_cast<double>(period);
  const auto x = synth::harmonic_sum(fs, 3.0, f0, {1.0});
  const auto rec = synth::as_recording(x, fs);
  const auto seg = exact_segmentation(x.size(), period, fs, x);

  const auto h = harmonic_profile(rec, seg);
  CHECK(std::abs(h.h_mu[0]) <= 0.01);     // dB; the maximum frame sets 0 dB
  CHECK(h.h_sd[0] <= 1e-6);
  CHECK(h.rel_h[0] >= 5e5);               // epsilon guard caps at 1e6
  for (int p = 1; p < kNumHarmonics; ++p) {
    CHECK(h.h_mu[static_cast<std::size_t>(p)] <= -60.0);
  }
}

TEST_CASE("two-harmonic signal reproduces the -6.02 dB amplitude ratio") {
  const double fs = 44100;
  const std::size_t period = 300;
  const double f0 = fs / static_cast<double>(period);
  const auto x = synth::harmonic_sum(fs, 3.0, f0, {1.0, 0.5});
  const auto rec = synth::as_recording(x, fs);
  const auto seg = exact_segmentation(x.size(), period, fs, x);

  const auto h = harmonic_profile(rec, seg);
  CHECK(h.h_mu[1] - h.h_mu[0] == doctest::Approx(20.0 * std::log10(0.5)).epsilon(0.1 / 6.02));
}

TEST_CASE("amplitude modulation of H2 appears in its spread, with an analytic oracle") {
  const double fs = 44100;
  const std::size_t period = 300;
  const double f0 = fs / static_cast<double>(period);
  const double dur = 3.0;
  const double am_hz = 3.0, am_depth = 0.2;

  const std::size_t n = static_cast<std::size_t>(fs * dur);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = std::sin(2.0 * kPi * f0 * t) +
           0.5 * (1.0 + am_depth * std::sin(2.0 * kPi * am_hz * t)) * std::sin(4.0 * kPi * f0 * t);
  }
  const auto rec = synth::as_recording(x, fs);
  const auto seg = exact_segmentation(n, period, fs, x);
  const auto h = harmonic_profile(rec, seg);

  CHECK(h.h_sd[1] > 10.0 * h.h_sd[0]);

  // Oracle: evaluate the windowed frame DFT bins from the closed-form signal
  // (no interpolation involved), frame layout as specified: 8 periods per
  // frame, 7-period hop, 4096-point grid, Hamming window.
  const int nc = 8, ppp = 512;
  const std::size_t pts = static_cast<std::size_t>(nc * ppp);
  const auto window = dsp::hamming_window(pts);
  std::vector<double> h2_frames;
  for (std::size_t start = 0; start + static_cast<std::size_t>(nc) < seg.boundaries.size();
       start += static_cast<std::size_t>(nc - 1)) {
    const double b0 = static_cast<double>(seg.boundaries[start]);
    const double b1 = static_cast<double>(seg.boundaries[start + nc]);
    std::complex<double> acc2 = 0.0;
    std::complex<double> accmax = 0.0;
    for (std::size_t k = 0; k < pts; ++k) {
      const double pos = b0 + (b1 - b0) * static_cast<double>(k) / static_cast<double>(pts);
      const double t = pos / fs;
      const double v = (std::sin(2.0 * kPi * f0 * t) +
                        0.5 * (1.0 + am_depth * std::sin(2.0 * kPi * am_hz * t)) *
                            std::sin(4.0 * kPi * f0 * t)) *
                       window[k];
      const double ang = -2.0 * kPi * static_cast<double>(2 * nc) * static_cast<double>(k) /
                         static_cast<double>(pts);
      acc2 += v * std::exp(std::complex<double>(0.0, ang));
      (void)accmax;
    }
    h2_frames.push_back(std::abs(acc2));
  }
  REQUIRE(h2_frames.size() >= 10);
  // dB spread of the oracle H2 track.
  double mu = 0.0;
  for (double v : h2_frames) mu += 20.0 * std::log10(v);
  mu /= static_cast<double>(h2_frames.size());
  double var = 0.0;
  for (double v : h2_frames) {
    const double d = 20.0 * std::log10(v) - mu;
    var += d * d;
  }
  const double oracle_sd = std::sqrt(var / static_cast<double>(h2_frames.size()));
  CHECK(h.h_sd[1] == doctest::Approx(oracle_sd).epsilon(0.05));
}

TEST_CASE("global-max scaling makes the profile amplitude invariant") {
  const double fs = 44100;
  const std::size_t period = 441;  // 100 Hz
  const double f0 = fs / static_cast<double>(period);
  const auto x = synth::harmonic_sum(fs, 2.0, f0, {1.0, 0.6, 0.3, 0.1});
  const auto rec = synth::as_recording(x, fs);
  const auto seg = exact_segmentation(x.size(), period, fs, x);
  const auto h1 = harmonic_profile(rec, seg);

  auto scaled = rec;
  for (auto& v : scaled.samples) v *= 4.0;  // exact in floating point
  const auto h2 = harmonic_profile(scaled, seg);
  for (int p = 0; p < kNumHarmonics; ++p) {
    CHECK(h1.h_mu[static_cast<std::size_t>(p)] == h2.h_mu[static_cast<std::size_t>(p)]);
    CHECK(h1.h_sd[static_cast<std::size_t>(p)] == h2.h_sd[static_cast<std::size_t>(p)]);
    CHECK(h1.rel_h[static_cast<std::size_t>(p)] == h2.rel_h[static_cast<std::size_t>(p)]);
  }

  auto scaled2 = rec;
  for (auto& v : scaled2.samples) v *= 1.7;
  const auto h3 = harmonic_profile(scaled2, seg);
  for (int p = 0; p < kNumHarmonics; ++p) {
    CHECK(h1.h_mu[static_cast<std::size_t>(p)] ==
          doctest::Approx(h3.h_mu[static_cast<std::size_t>(p)]).epsilon(1e-9));
  }
}

TEST_CASE("fewer than nine cycles is an error") {
  const double fs = 44100;
  const std::size_t period = 441;
  const auto x = synth::harmonic_sum(fs, 0.09, fs / static_cast<double>(period), {1.0});
  const auto rec = synth::as_recording(x, fs);
  const auto seg = exact_segmentation(x.size(), period, fs, x);  // 8 cycles
  CHECK(seg.cycles() == 8);
  CHECK_THROWS_AS(harmonic_profile(rec, seg), ComputeError);
}

}  // TEST_SUITE
