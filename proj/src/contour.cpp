#include "vowelmark/contour.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "vowelmark/dsp.hpp"
#include "vowelmark/util.hpp"

namespace vowelmark {

namespace {
constexpr int kPpeBins = 31;
constexpr double kPpeRange = 1.5;
constexpr int kPpeOrder = 2;

double voiced_mean(const F0Contour& c) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t m = 0; m < c.frames(); ++m) {
    if (c.voiced[m]) {
      sum += c.f0[m];
      ++n;
    }
  }
  if (n == 0) throw ComputeError("contour has no voiced frames");
  return sum / static_cast<double>(n);
}
}  // namespace

std::vector<double> bridged_contour(const F0Contour& contour) {
  std::size_t first = contour.frames(), last = 0;
  for (std::size_t m = 0; m < contour.frames(); ++m) {
    if (contour.voiced[m]) {
      if (first == contour.frames()) first = m;
      last = m;
    }
  }
  if (first == contour.frames()) throw ComputeError("contour has no voiced frames");

  std::vector<double> out;
  out.reserve(last - first + 1);
  std::size_t prev_voiced = first;
  for (std::size_t m = first; m <= last; ++m) {
    if (contour.voiced[m]) {
      // Fill any gap since the last voiced frame by linear interpolation.
      for (std::size_t g = prev_voiced + 1; g < m; ++g) {
        const double t = static_cast<double>(g - prev_voiced) / static_cast<double>(m - prev_voiced);
        out.push_back(contour.f0[prev_voiced] + t * (contour.f0[m] - contour.f0[prev_voiced]));
      }
      out.push_back(contour.f0[m]);
      prev_voiced = m;
    }
  }
  return out;
}

double pfr(const F0Contour& contour) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t m = 0; m < contour.frames(); ++m) {
    if (!contour.voiced[m]) continue;
    if (!any) {
      lo = hi = contour.f0[m];
      any = true;
    } else {
      lo = std::min(lo, contour.f0[m]);
      hi = std::max(hi, contour.f0[m]);
    }
  }
  if (!any) throw ComputeError("pfr: contour has no voiced frames");
  return 12.0 * std::log2(hi / lo);
}

double ppe_entropy(std::span<const double> residuals) {
  if (residuals.empty()) throw ComputeError("ppe: no residuals");
  std::array<double, kPpeBins> hist{};
  const double width = 2.0 * kPpeRange / kPpeBins;
  for (double r : residuals) {
    int bin = static_cast<int>(std::floor((r + kPpeRange) / width));
    bin = std::clamp(bin, 0, kPpeBins - 1);  // out-of-range mass goes to the end bins
    hist[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double total = static_cast<double>(residuals.size());
  double entropy = 0.0;
  for (double h : hist) {
    if (h <= 0.0) continue;
    const double p = h / total;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double ppe(const F0Contour& contour) {
  if (contour.voiced_seconds() < 2.0) {
    throw ComputeError("ppe: needs >= 2 s of voiced contour");
  }
  const double f_low = voiced_mean(contour) / std::sqrt(2.0);
  auto f0 = bridged_contour(contour);

  std::vector<double> p(f0.size());
  for (std::size_t m = 0; m < f0.size(); ++m) p[m] = 12.0 * std::log2(f0[m] / f_low);

  auto a = dsp::lpc_covariance(p, kPpeOrder);
  std::vector<double> resid;
  resid.reserve(p.size() - kPpeOrder);
  for (std::size_t m = kPpeOrder; m < p.size(); ++m) {
    double r = p[m];
    for (int i = 1; i <= kPpeOrder; ++i) r += a[static_cast<std::size_t>(i - 1)] * p[m - static_cast<std::size_t>(i)];
    resid.push_back(r);
  }
  return ppe_entropy(resid);
}

double pvi(const F0Contour& contour) {
  if (contour.voiced_seconds() < 2.0) {
    throw ComputeError("pvi: needs >= 2 s of voiced contour");
  }
  const double rate = 1.0 / F0Contour::kStep;  // 200 Hz
  const double mean = voiced_mean(contour);
  auto f0 = bridged_contour(contour);

  // Normalized, mean-free contour; the band-pass has zero DC gain so the
  // subtraction only removes the constant part exactly.
  std::vector<double> x(f0.size());
  for (std::size_t m = 0; m < f0.size(); ++m) x[m] = f0[m] / mean - 1.0;

  static const dsp::Iir bp = dsp::butterworth_bandpass(3, 9.0, 14.0, 200.0);
  auto filtered = dsp::filtfilt(bp, x);

  // Welch amplitude spectrum: 1 s Hann segments, 95% overlap.
  const std::size_t seg_len = static_cast<std::size_t>(std::lround(1.0 * rate));
  const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.05 * seg_len)));
  if (filtered.size() < seg_len) throw ComputeError("pvi: contour shorter than 1 s window");

  const auto window = dsp::hann_window(seg_len);
  double wsum = 0.0;
  for (double w : window) wsum += w;

  const std::size_t n_segs = (filtered.size() - seg_len) / hop + 1;
  std::vector<double> amp(seg_len / 2 + 1, 0.0);
  std::vector<double> buf(seg_len);
  for (std::size_t sgi = 0; sgi < n_segs; ++sgi) {
    for (std::size_t i = 0; i < seg_len; ++i) buf[i] = filtered[sgi * hop + i] * window[i];
    auto spec = dsp::fft(std::span<const double>(buf));
    for (std::size_t j = 0; j < amp.size(); ++j) {
      amp[j] += 2.0 * std::abs(spec[j]) / wsum;  // one-sided amplitude
    }
  }
  for (auto& v : amp) v /= static_cast<double>(n_segs);

  const double bin_hz = rate / static_cast<double>(seg_len);
  double sum = 0.0;
  for (std::size_t j = 0; j < amp.size(); ++j) {
    const double f = bin_hz * static_cast<double>(j);
    if (f >= 9.0 && f <= 14.0) sum += amp[j];
  }
  return sum;
}

}  // namespace vowelmark
