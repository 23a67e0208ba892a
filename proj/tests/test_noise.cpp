#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "synthvoice.hpp"
#include "vowelmark/noise.hpp"
#include "vowelmark/util.hpp"

using namespace vowelmark;
namespace synth = vowelmark::synth;

namespace {
constexpr double kPi = std::numbers::pi;

F0Contour constant_contour(double f0, double duration, bool voiced = true) {
  F0Contour c;
  const std::size_t frames = static_cast<std::size_t>(duration / F0Contour::kStep);
  c.f0.assign(frames, voiced ? f0 : 0.0);
  c.voiced.assign(frames, voiced ? 1 : 0);
  c.mean_f0 = voiced ? f0 : 0.0;
  return c;
}

std::vector<double> sine(double fs, double dur, double freq, double amp) {
  std::vector<double> x(static_cast<std::size_t>(fs * dur));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / fs);
  }
  return x;
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<double> mix_at_snr(const std::vector<double>& sig, double snr_db, std::uint64_t seed) {
  auto noise = synth::white_noise(44100, static_cast<double>(sig.size()) / 44100.0, seed, 1.0);
  noise.resize(sig.size());
  const double target_noise_rms = rms(sig) / std::pow(10.0, snr_db / 20.0);
  const double scale = target_noise_rms / rms(noise);
  std::vector<double> out(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i) out[i] = sig[i] + scale * noise[i];
  return out;
}
}  // namespace

TEST_SUITE("noise") {

TEST_CASE("pure sinusoid rails high, bounded by the clamp") {
  // The finite-window cross term limits the estimator near AC = 1 - 3e-5,
  // i.e. about 45 dB for a 40 ms window; the clamp caps it at 60.
  const auto rec = synth::as_recording(sine(44100, 3.0, 150.0, 0.5), 44100);
  const double h = hnr(rec, constant_contour(150.0, 3.0));
  CHECK(h >= 40.0);
  CHECK(h <= 60.0);
}

TEST_CASE("equal-power periodic+noise mix sits at 0 dB") {
  const auto sig = sine(44100, 3.0, 150.0, 0.5);
  const auto rec = synth::as_recording(mix_at_snr(sig, 0.0, 21), 44100);
  const double h = hnr(rec, constant_contour(150.0, 3.0));
  CHECK(std::abs(h) <= 1.0);
}

TEST_CASE("HNR decreases strictly with SNR") {
  const auto sig = sine(44100, 3.0, 150.0, 0.5);
  const double h_hi = hnr(synth::as_recording(mix_at_snr(sig, 20.0, 31), 44100), constant_contour(150.0, 3.0));
  const double h_mid = hnr(synth::as_recording(mix_at_snr(sig, 0.0, 32), 44100), constant_contour(150.0, 3.0));
  const double h_lo = hnr(synth::as_recording(mix_at_snr(sig, -20.0, 33), 44100), constant_contour(150.0, 3.0));
  CHECK(h_hi > h_mid);
  CHECK(h_mid > h_lo);
  CHECK(h_hi == doctest::Approx(20.0).epsilon(0.1));
  CHECK(h_lo >= -20.0);
}

TEST_CASE("all-unvoiced contour is an error") {
  const auto rec = synth::as_recording(synth::white_noise(44100, 2.0, 9), 44100);
  CHECK_THROWS_WITH_AS(hnr(rec, constant_contour(0.0, 2.0, false)),
                       doctest::Contains("no voiced frames"), ComputeError);
}

TEST_CASE("glottal-like excitation scores high GNE, noise lower") {
  synth::VoiceParams p;
  p.duration = 2.0;
  p.f0 = 120.0;
  p.jitter_pct = 0.0;
  p.shimmer_pct = 0.0;
  p.vibrato_cents = 0.0;
  p.wander_cents = 0.0;
  p.am_depth = 0.0;
  p.noise_snr_db = 900.0;
  p.seed = 3;
  const auto glottal = synth::as_recording(synth::phonation(p), p.sample_rate);
  const auto g1 = gne(glottal);
  CHECK(g1.mean >= 0.85);

  const auto noisy = synth::as_recording(synth::white_noise(44100, 2.0, 17), 44100);
  const auto g2 = gne(noisy);
  CHECK(g2.mean < g1.mean);
  CHECK(g1.mean - g2.mean >= 0.05);
}

TEST_CASE("GNE is amplitude invariant and in [0,1]") {
  synth::VoiceParams p;
  p.duration = 1.5;
  p.f0 = 110.0;
  p.noise_snr_db = 18.0;
  p.seed = 4;
  auto rec = synth::as_recording(synth::phonation(p), p.sample_rate);
  const auto g1 = gne(rec);

  auto scaled = rec;
  for (auto& v : scaled.samples) v *= 0.3;
  const auto g2 = gne(scaled);
  CHECK(std::abs(g1.mean - g2.mean) < 1e-6);
  CHECK(std::abs(g1.sd - g2.sd) < 1e-6);

  for (double v : gne_frames(rec)) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("GNE is deterministic bit for bit") {
  synth::VoiceParams p;
  p.duration = 1.0;
  p.seed = 5;
  const auto rec = synth::as_recording(synth::phonation(p), p.sample_rate);
  const auto a = gne(rec);
  const auto b = gne(rec);
  CHECK(a.mean == b.mean);
  CHECK(a.sd == b.sd);
}

TEST_CASE("too-short recording is an error") {
  const auto rec = synth::as_recording(sine(44100, 0.3, 150.0, 0.5), 44100);
  CHECK_THROWS_AS(gne(rec), ComputeError);
}

}  // TEST_SUITE
