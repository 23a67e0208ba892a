#include "vowelmark/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vowelmark/util.hpp"

namespace vowelmark::dsp {

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}
}  // namespace

std::vector<std::complex<double>> fft(std::span<const double> x) {
  std::vector<std::complex<double>> in(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) in[i] = x[i];
  return fft(std::span<const std::complex<double>>(in));
}

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
  std::vector<std::complex<double>> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(x.size());
  fft_engine().fwd(out, in);
  return out;
}

std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x) {
  std::vector<std::complex<double>> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(x.size());
  fft_engine().inv(out, in);
  return out;
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return w;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  return w;
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  max_lag = std::min(max_lag, n - 1);
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;

  std::vector<std::complex<double>> buf(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
  auto spec = fft(std::span<const std::complex<double>>(buf));
  for (auto& c : spec) c = c * std::conj(c);
  auto corr = ifft(std::span<const std::complex<double>>(spec));

  std::vector<double> r(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) r[k] = corr[k].real();
  return r;
}

ParabolicPeak refine_peak(double ym1, double y0, double yp1) {
  const double denom = ym1 - 2.0 * y0 + yp1;
  if (denom >= 0.0 || std::abs(denom) < 1e-300) return {0.0, y0};
  double d = 0.5 * (ym1 - yp1) / denom;
  d = std::clamp(d, -1.0, 1.0);
  const double v = y0 - 0.25 * (ym1 - yp1) * d;
  return {d, v};
}

// ---------------------------------------------------------------------------
// Kaiser-windowed sinc kernels.

namespace {

double bessel_i0(double x) {
  // Power series; converges quickly for the beta range used here.
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

constexpr double kKaiserBeta = 8.6;

// Normalized sinc kernel value at offset t (input samples), cutoff c in
// cycles/sample, half-width T (zero at |t| == T).
inline double sinc_kernel(double t, double c, double half_width_t, double inv_i0_beta) {
  if (std::abs(t) >= half_width_t) return 0.0;
  const double x = 2.0 * c * t;
  double s = (std::abs(x) < 1e-12) ? 1.0 : std::sin(kPi * x) / (kPi * x);
  const double u = t / half_width_t;
  const double w = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) * inv_i0_beta;
  return 2.0 * c * s * w;
}

// Tabulated kernel with linear interpolation; the Bessel evaluation is far
// too slow for the per-tap inner loops.
class SincTable {
 public:
  SincTable(double cutoff, double half_width) : half_(half_width) {
    const double inv_i0 = 1.0 / bessel_i0(kKaiserBeta);
    // ~128 samples per sinc zero crossing keeps the linear-interp error
    // around 1e-5 of the local amplitude.
    const double crossing = 1.0 / (2.0 * cutoff);
    n_ = static_cast<std::size_t>(std::ceil(half_width / crossing * 128.0)) + 2;
    step_ = half_width / static_cast<double>(n_ - 2);
    table_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      table_[i] = sinc_kernel(static_cast<double>(i) * step_, cutoff, half_width, inv_i0);
    }
  }

  double operator()(double t) const {
    const double a = std::abs(t);
    if (a >= half_) return 0.0;
    const double idx = a / step_;
    const std::size_t i = static_cast<std::size_t>(idx);
    const double frac = idx - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  double half_, step_ = 1.0;
  std::size_t n_ = 0;
  std::vector<double> table_;
};

}  // namespace

std::vector<double> resample_sinc(std::span<const double> x, double in_rate, double out_rate,
                                  double cutoff_scale) {
  if (in_rate <= 0 || out_rate <= 0) throw InputError("resample: rates must be positive");
  if (cutoff_scale <= 0 || cutoff_scale > 0.5) throw InputError("resample: cutoff_scale in (0, 0.5]");
  if (in_rate == out_rate) return std::vector<double>(x.begin(), x.end());
  const std::size_t n = x.size();
  if (n == 0) return {};

  const double cutoff_hz = cutoff_scale * std::min(in_rate, out_rate);
  const double c = cutoff_hz / in_rate;  // cycles per input sample
  const int zero_crossings = 32;
  const double half_width = static_cast<double>(zero_crossings) / (2.0 * c);
  const SincTable kernel(c, half_width);

  const std::size_t out_n =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * out_rate / in_rate));
  std::vector<double> y(out_n, 0.0);

  for (std::size_t m = 0; m < out_n; ++m) {
    const double t = static_cast<double>(m) * in_rate / out_rate;
    const long lo = static_cast<long>(std::ceil(t - half_width));
    const long hi = static_cast<long>(std::floor(t + half_width));
    double acc = 0.0, ksum = 0.0;
    for (long k = std::max(0l, lo); k <= std::min(static_cast<long>(n) - 1, hi); ++k) {
      const double kv = kernel(static_cast<double>(k) - t);
      acc += kv * x[static_cast<std::size_t>(k)];
      ksum += kv;
    }
    // Kernel-sum normalization flattens passband ripple and edge truncation.
    y[m] = (std::abs(ksum) > 1e-6) ? acc / ksum : acc;
  }
  return y;
}

std::vector<double> interpolate_sinc(std::span<const double> x,
                                     std::span<const double> positions, int half_width) {
  const double c = 0.5;
  const double hw = static_cast<double>(half_width);
  const SincTable kernel(c, hw);
  const long n = static_cast<long>(x.size());

  std::vector<double> y(positions.size(), 0.0);
  for (std::size_t m = 0; m < positions.size(); ++m) {
    const double t = positions[m];
    const long lo = static_cast<long>(std::ceil(t - hw));
    const long hi = static_cast<long>(std::floor(t + hw));
    double acc = 0.0;
    for (long k = std::max(0l, lo); k <= std::min(n - 1, hi); ++k) {
      acc += kernel(static_cast<double>(k) - t) * x[static_cast<std::size_t>(k)];
    }
    y[m] = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Butterworth band-pass.

namespace {

// Expand a polynomial from complex roots; coefficients come out essentially
// real for conjugate-closed root sets.
std::vector<std::complex<double>> poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> coeff{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(coeff.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeff.size(); ++i) {
      next[i] += coeff[i];
      next[i + 1] -= coeff[i] * r;
    }
    coeff = std::move(next);
  }
  return coeff;
}

}  // namespace

Iir butterworth_bandpass(int order, double f_lo, double f_hi, double sample_rate) {
  if (order < 1 || f_lo <= 0 || f_hi <= f_lo || f_hi >= sample_rate / 2) {
    throw InputError("butterworth_bandpass: bad band edges");
  }
  const double fs2 = 2.0 * sample_rate;
  const double w1 = fs2 * std::tan(kPi * f_lo / sample_rate);
  const double w2 = fs2 * std::tan(kPi * f_hi / sample_rate);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  // Analog low-pass prototype poles on the unit circle, left half-plane.
  std::vector<std::complex<double>> proto;
  for (int k = 0; k < order; ++k) {
    const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
    proto.emplace_back(std::cos(theta), std::sin(theta));
  }

  // Low-pass -> band-pass: each prototype pole p yields the two roots of
  // s^2 - p*bw*s + w0^2.
  std::vector<std::complex<double>> apoles;
  for (const auto& p : proto) {
    const std::complex<double> pb = p * bw;
    const std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    apoles.push_back((pb + disc) / 2.0);
    apoles.push_back((pb - disc) / 2.0);
  }

  // Bilinear transform; n zeros at s=0 -> z=1, n zeros from infinity -> z=-1.
  std::vector<std::complex<double>> zpoles, zzeros;
  for (const auto& s : apoles) zpoles.push_back((fs2 + s) / (fs2 - s));
  for (int k = 0; k < order; ++k) {
    zzeros.emplace_back(1.0, 0.0);
    zzeros.emplace_back(-1.0, 0.0);
  }

  auto bc = poly_from_roots(zzeros);
  auto ac = poly_from_roots(zpoles);

  Iir f;
  f.b.resize(bc.size());
  f.a.resize(ac.size());
  for (std::size_t i = 0; i < bc.size(); ++i) f.b[i] = bc[i].real();
  for (std::size_t i = 0; i < ac.size(); ++i) f.a[i] = ac[i].real();

  // Unit gain at the (bilinear-mapped) center frequency.
  const double f_center = sample_rate / kPi * std::atan(w0 / fs2);
  const double g = std::abs(freq_response(f, f_center, sample_rate));
  if (g <= 0) throw ComputeError("butterworth_bandpass: degenerate gain");
  for (auto& v : f.b) v /= g;
  return f;
}

std::vector<double> filter(const Iir& f, std::span<const double> x) {
  const std::size_t nb = f.b.size(), na = f.a.size();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nb && k <= i; ++k) acc += f.b[k] * x[i - k];
    for (std::size_t k = 1; k < na && k <= i; ++k) acc -= f.a[k] * y[i - k];
    y[i] = acc;
  }
  return y;
}

namespace {

// One direct-form-II-transposed pass with initial state scaled to the first
// input sample (steady-state step response), as in the usual filtfilt recipe.
std::vector<double> filter_zi(const Iir& f, std::span<const double> x) {
  const std::size_t order = std::max(f.a.size(), f.b.size()) - 1;
  std::vector<double> b(f.b), a(f.a);
  b.resize(order + 1, 0.0);
  a.resize(order + 1, 0.0);

  const double bsum = [&] { double s = 0; for (double v : b) s += v; return s; }();
  const double asum = [&] { double s = 0; for (double v : a) s += v; return s; }();
  const double h1 = (std::abs(asum) > 1e-300) ? bsum / asum : 0.0;

  // Steady-state internal state for unit step input.
  std::vector<double> zi(order, 0.0);
  for (std::size_t k = order; k-- > 0;) {
    const double tail = (k + 1 < order) ? zi[k + 1] : 0.0;
    zi[k] = tail + (b[k + 1] - a[k + 1] * h1);
  }

  std::vector<double> z(order);
  const double x0 = x.empty() ? 0.0 : x.front();
  for (std::size_t k = 0; k < order; ++k) z[k] = zi[k] * x0;

  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = b[0] * xi + (order ? z[0] : 0.0);
    for (std::size_t k = 0; k + 1 < order; ++k) {
      z[k] = b[k + 1] * xi + z[k + 1] - a[k + 1] * yi;
    }
    if (order) z[order - 1] = b[order] * xi - a[order] * yi;
    y[i] = yi;
  }
  return y;
}

}  // namespace

std::vector<double> filtfilt(const Iir& f, std::span<const double> x) {
  const std::size_t order = std::max(f.a.size(), f.b.size()) - 1;
  const std::size_t padlen = 3 * order;
  if (x.size() <= padlen + 1) throw InputError("filtfilt: input too short for edge padding");

  // Odd reflection at both ends.
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 2; i <= padlen + 1; ++i) ext.push_back(2.0 * x[x.size() - 1] - x[x.size() - i]);

  auto fwd = filter_zi(f, ext);
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = filter_zi(f, fwd);
  std::reverse(bwd.begin(), bwd.end());

  return std::vector<double>(bwd.begin() + static_cast<long>(padlen),
                             bwd.begin() + static_cast<long>(padlen + x.size()));
}

std::complex<double> freq_response(const Iir& f, double freq, double sample_rate) {
  const std::complex<double> zinv = std::exp(std::complex<double>(0.0, -2.0 * kPi * freq / sample_rate));
  std::complex<double> num = 0.0, den = 0.0, zk = 1.0;
  for (std::size_t k = 0; k < std::max(f.b.size(), f.a.size()); ++k) {
    if (k < f.b.size()) num += f.b[k] * zk;
    if (k < f.a.size()) den += f.a[k] * zk;
    zk *= zinv;
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Linear prediction.

std::vector<double> levinson(std::span<const double> r, int order, double* out_err) {
  if (static_cast<int>(r.size()) < order + 1) throw InputError("levinson: need r[0..order]");
  std::vector<double> a(order + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  if (err <= 0.0) {
    if (out_err) *out_err = 0.0;
    return std::vector<double>(order, 0.0);
  }
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    std::vector<double> prev(a.begin(), a.begin() + i);
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= (1.0 - k * k);
    if (err <= 0.0) { err = 1e-300; }
  }
  if (out_err) *out_err = err;
  return std::vector<double>(a.begin() + 1, a.end());
}

std::vector<double> lpc_autocorrelation(std::span<const double> frame, int order,
                                        std::span<const double> window) {
  if (frame.size() != window.size()) throw InputError("lpc: frame/window size mismatch");
  std::vector<double> w(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) w[i] = frame[i] * window[i];
  auto r = autocorrelation(w, static_cast<std::size_t>(order));
  if (r.size() < static_cast<std::size_t>(order) + 1) r.resize(order + 1, 0.0);
  return levinson(r, order);
}

std::vector<double> lpc_covariance(std::span<const double> x, int order) {
  const int n = static_cast<int>(x.size());
  if (n <= order) throw InputError("lpc_covariance: sequence shorter than order");
  // phi(i,k) = sum_{m=order}^{n-1} x[m-i] x[m-k]
  std::vector<double> phi((order + 1) * (order + 1), 0.0);
  for (int i = 0; i <= order; ++i) {
    for (int k = i; k <= order; ++k) {
      double s = 0.0;
      for (int m = order; m < n; ++m) s += x[m - i] * x[m - k];
      phi[i * (order + 1) + k] = s;
      phi[k * (order + 1) + i] = s;
    }
  }
  // Solve phi[1..p][1..p] a = -phi[1..p][0] with a tiny ridge for the
  // degenerate (e.g. constant-input) case.
  const int p = order;
  std::vector<double> m(p * p), rhs(p);
  double tr = 0.0;
  for (int i = 1; i <= p; ++i) tr += phi[i * (order + 1) + i];
  const double ridge = (tr > 0 ? tr : 1.0) * 1e-12;
  for (int i = 1; i <= p; ++i) {
    rhs[i - 1] = -phi[i * (order + 1)];
    for (int k = 1; k <= p; ++k) m[(i - 1) * p + (k - 1)] = phi[i * (order + 1) + k];
    m[(i - 1) * p + (i - 1)] += ridge;
  }
  // Gaussian elimination with partial pivoting (p is tiny).
  std::vector<double> a(p, 0.0);
  for (int col = 0; col < p; ++col) {
    int piv = col;
    for (int rrow = col + 1; rrow < p; ++rrow) {
      if (std::abs(m[rrow * p + col]) > std::abs(m[piv * p + col])) piv = rrow;
    }
    if (std::abs(m[piv * p + col]) < 1e-300) continue;
    if (piv != col) {
      for (int k = 0; k < p; ++k) std::swap(m[piv * p + k], m[col * p + k]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (int rrow = col + 1; rrow < p; ++rrow) {
      const double f = m[rrow * p + col] / m[col * p + col];
      for (int k = col; k < p; ++k) m[rrow * p + k] -= f * m[col * p + k];
      rhs[rrow] -= f * rhs[col];
    }
  }
  for (int i = p - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int k = i + 1; k < p; ++k) s -= m[i * p + k] * a[k];
    a[i] = (std::abs(m[i * p + i]) < 1e-300) ? 0.0 : s / m[i * p + i];
  }
  return a;
}

std::vector<double> inverse_filter(std::span<const double> x, std::span<const double> a) {
  const std::size_t p = a.size();
  std::vector<double> e(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    for (std::size_t k = 1; k <= p && k <= n; ++k) acc += a[k - 1] * x[n - k];
    e[n] = acc;
  }
  return e;
}

std::vector<double> hilbert_band_envelope(std::span<const double> x, double sample_rate,
                                          double f_center, double bandwidth) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto spec = fft(x);

  const double df = sample_rate / static_cast<double>(n);
  const double f1 = f_center - bandwidth / 2.0;
  const double f2 = f_center + bandwidth / 2.0;

  std::vector<std::complex<double>> analytic(n, 0.0);
  // Positive frequencies only, doubled: analytic signal of the band slice.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k <= half; ++k) {
    const double fk = df * static_cast<double>(k);
    if (fk >= f1 && fk <= f2) {
      const double scale = (2 * k == n) ? 1.0 : 2.0;  // Nyquist bin not doubled
      analytic[k] = scale * spec[k];
    }
  }
  auto sig = ifft(std::span<const std::complex<double>>(analytic));
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(sig[i]);
  return env;
}

}  // namespace vowelmark::dsp
