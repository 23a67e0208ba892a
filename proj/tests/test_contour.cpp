#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "vowelmark/contour.hpp"
#include "vowelmark/util.hpp"

using namespace vowelmark;

namespace {
constexpr double kPi = std::numbers::pi;

F0Contour contour_from(const std::vector<double>& f0) {
  F0Contour c;
  c.f0 = f0;
  c.voiced.assign(f0.size(), 1);
  double sum = 0.0;
  for (double v : f0) sum += v;
  c.mean_f0 = sum / static_cast<double>(f0.size());
  return c;
}

F0Contour fm_contour(double f0, double mod_hz, double depth, double duration) {
  std::vector<double> v;
  const std::size_t frames = static_cast<std::size_t>(duration / F0Contour::kStep);
  for (std::size_t m = 0; m < frames; ++m) {
    const double t = static_cast<double>(m) * F0Contour::kStep;
    v.push_back(f0 * (1.0 + depth * std::sin(2.0 * kPi * mod_hz * t)));
  }
  return contour_from(v);
}
}  // namespace

TEST_SUITE("contour") {

TEST_CASE("phonatory frequency range") {
  CHECK(pfr(contour_from(std::vector<double>(400, 150.0))) == 0.0);

  std::vector<double> octave(400, 100.0);
  octave[10] = 200.0;
  CHECK(pfr(contour_from(octave)) == doctest::Approx(12.0).epsilon(1e-12));

  std::vector<double> fifth(400, 100.0);
  fifth[399] = 150.0;
  CHECK(pfr(contour_from(fifth)) == doctest::Approx(7.0196).epsilon(1e-4));

  // Depends only on extremes: any permutation gives the same value.
  std::vector<double> perm(fifth.rbegin(), fifth.rend());
  CHECK(pfr(contour_from(perm)) == pfr(contour_from(fifth)));
}

TEST_CASE("PPE of a perfectly steady pitch is zero") {
  const auto c = contour_from(std::vector<double>(600, 150.0));
  CHECK(ppe(c) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("uniform residual injection reaches the entropy ceiling") {
  // Equal mass in all 31 bins.
  std::vector<double> residuals;
  for (int b = 0; b < 31; ++b) {
    const double center = -1.5 + (b + 0.5) * 3.0 / 31.0;
    for (int rep = 0; rep < 10; ++rep) residuals.push_back(center);
  }
  CHECK(ppe_entropy(residuals) == doctest::Approx(std::log2(31.0)).epsilon(1e-12));
  CHECK(std::log2(31.0) == doctest::Approx(4.954).epsilon(1e-3));
}

TEST_CASE("PPE stays within [0, log2 31] and ranks wander above vibrato") {
  Rng rng(17);
  // Smooth vibrato only.
  std::vector<double> smooth;
  for (int m = 0; m < 800; ++m) {
    const double t = m * 0.005;
    smooth.push_back(140.0 * std::pow(2.0, 8.0 / 1200.0 * std::sin(2.0 * kPi * 5.0 * t)));
  }
  // Random wander on top.
  std::vector<double> wandering;
  double w = 0.0;
  for (int m = 0; m < 800; ++m) {
    const double t = m * 0.005;
    w = 0.995 * w + 3.0 * rng.next_gauss();
    wandering.push_back(140.0 * std::pow(2.0, (8.0 * std::sin(2.0 * kPi * 5.0 * t) + w) / 1200.0));
  }
  const double p_smooth = ppe(contour_from(smooth));
  const double p_wander = ppe(contour_from(wandering));
  CHECK(p_smooth >= 0.0);
  CHECK(p_wander <= std::log2(31.0));
  CHECK(p_wander > p_smooth);
}

TEST_CASE("PPE and PVI need two voiced seconds") {
  const auto c = contour_from(std::vector<double>(300, 150.0));  // 1.5 s
  CHECK_THROWS_AS(ppe(c), ComputeError);
  CHECK_THROWS_AS(pvi(c), ComputeError);
}

TEST_CASE("PVI: silence in the stopband, signal in the passband") {
  const auto constant = contour_from(std::vector<double>(800, 150.0));
  CHECK(pvi(constant) < 1e-9);

  const double v11 = pvi(fm_contour(150.0, 11.0, 0.02, 4.0));
  const double v5 = pvi(fm_contour(150.0, 5.0, 0.02, 4.0));
  CHECK(v11 >= 5.0 * v5);
  CHECK(v11 > 0.0);
}

TEST_CASE("PVI is pitch-scale invariant") {
  const auto base = fm_contour(150.0, 11.0, 0.02, 4.0);
  F0Contour scaled = base;
  for (auto& v : scaled.f0) v *= 1.37;
  scaled.mean_f0 *= 1.37;
  const double a = pvi(base);
  const double b = pvi(scaled);
  CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
}

TEST_CASE("unvoiced gaps are bridged by linear interpolation") {
  F0Contour c = fm_contour(150.0, 11.0, 0.02, 4.0);
  for (std::size_t m = 300; m < 350; ++m) {
    c.voiced[m] = 0;
    c.f0[m] = 0.0;
  }
  const auto bridged = bridged_contour(c);
  CHECK(bridged.size() == c.frames());
  // Interior of the gap is between the endpoint values.
  const double lo = std::min(c.f0[299], c.f0[350]);
  const double hi = std::max(c.f0[299], c.f0[350]);
  CHECK(bridged[320] >= lo - 1e-12);
  CHECK(bridged[320] <= hi + 1e-12);
  CHECK_NOTHROW(pvi(c));
  CHECK_NOTHROW(ppe(c));
}

}  // TEST_SUITE
