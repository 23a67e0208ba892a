#include "vowelmark/perturb.hpp"

#include <cmath>
#include <limits>

#include "vowelmark/util.hpp"

namespace vowelmark {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double local_perturbation(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw InputError("local perturbation needs at least 2 cycles");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) acc += std::abs(x[i] - x[i + 1]);
  acc /= static_cast<double>(n - 1);
  return acc / mean(x) * 100.0;
}

double windowed_quotient(std::span<const double> x, int window) {
  if (window < 3 || window % 2 == 0) throw InputError("perturbation quotient window must be odd and >= 3");
  const std::size_t n = x.size();
  const std::size_t w = static_cast<std::size_t>(window);
  if (n < w) return kMissing;  // feature marked missing for short recordings

  const std::size_t half = w / 2;
  double acc = 0.0;
  for (std::size_t i = half; i + half < n; ++i) {
    double win_mean = 0.0;
    for (std::size_t k = i - half; k <= i + half; ++k) win_mean += x[k];
    win_mean /= static_cast<double>(w);
    acc += std::abs(x[i] - win_mean);
  }
  acc /= static_cast<double>(n - w + 1);
  return acc / mean(x) * 100.0;
}

inline int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double jitter_local(std::span<const double> t0) { return local_perturbation(t0); }
double jitter_ppq(std::span<const double> t0, int window_length) {
  return windowed_quotient(t0, window_length);
}
double shimmer_local(std::span<const double> amp) { return local_perturbation(amp); }
double shimmer_apq(std::span<const double> amp, int window_length) {
  return windowed_quotient(amp, window_length);
}

double dfp(std::span<const double> t0) {
  const std::size_t n = t0.size();
  if (n < 3) throw InputError("dfp needs at least 3 cycles");
  // delta(i) = t0(i) - t0(i-1) exists for i in [1, n); compare consecutive
  // deltas, so i runs from 2.
  double changes = 0.0;
  for (std::size_t i = 2; i < n; ++i) {
    const int a = sgn(t0[i] - t0[i - 1]);
    const int b = sgn(t0[i - 1] - t0[i - 2]);
    changes += 0.5 * std::abs(a - b);
  }
  return changes / static_cast<double>(n) * 100.0;
}

PerturbationFeatures perturbation_features(const PeriodSegmentation& seg) {
  const auto& t0 = seg.t0;
  const auto& amp = seg.amp;
  PerturbationFeatures f{};
  f.j_loc = jitter_local(t0);
  f.j_ppq3 = jitter_ppq(t0, 3);
  f.j_ppq5 = jitter_ppq(t0, 5);
  f.j_ppq55 = jitter_ppq(t0, 55);
  f.s_loc = shimmer_local(amp);
  f.s_apq3 = shimmer_apq(amp, 3);
  f.s_apq5 = shimmer_apq(amp, 5);
  f.s_apq11 = shimmer_apq(amp, 11);
  f.s_apq55 = shimmer_apq(amp, 55);
  f.dfp = dfp(t0);
  return f;
}

}  // namespace vowelmark
