#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vowelmark::dsp {

// ---------------------------------------------------------------------------
// FFT (arbitrary length). Thin wrappers over a cached mixed-radix plan;
// safe to call from multiple threads.

std::vector<std::complex<double>> fft(std::span<const double> x);
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);
std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x);

// ---------------------------------------------------------------------------
// Windows (symmetric).

std::vector<double> hamming_window(std::size_t n);
std::vector<double> hann_window(std::size_t n);

// ---------------------------------------------------------------------------
// Autocorrelation r[0..max_lag] of x, computed via FFT. Biased estimate
// (plain lag products, no length compensation).

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

// Quadratic interpolation around a sampled peak: given y(-1), y(0), y(+1)
// with y(0) the discrete maximum, returns the vertex offset in (-1, 1) and
// the interpolated peak value.
struct ParabolicPeak {
  double offset;
  double value;
};
ParabolicPeak refine_peak(double ym1, double y0, double yp1);

// ---------------------------------------------------------------------------
// Windowed-sinc (Kaiser) resampling and fractional interpolation.

// Band-limited rate conversion. Cutoff is cutoff_scale * min(in_rate,
// out_rate); the 0.45 default leaves a guard band below Nyquist.
std::vector<double> resample_sinc(std::span<const double> x, double in_rate, double out_rate,
                                  double cutoff_scale = 0.45);

// Band-limited evaluation of x at fractional sample positions. Positions
// outside [0, n-1] read as 0.
std::vector<double> interpolate_sinc(std::span<const double> x,
                                     std::span<const double> positions,
                                     int half_width = 32);

// ---------------------------------------------------------------------------
// IIR filtering. Coefficient layout matches the usual difference equation
//   a[0] y[n] = sum_k b[k] x[n-k] - sum_{k>=1} a[k] y[n-k],  a[0] == 1.

struct Iir {
  std::vector<double> b;
  std::vector<double> a;
};

// Butterworth band-pass of the given analog prototype order (the digital
// filter has 2*order poles). Bilinear transform with prewarping; unit gain
// at the geometric-mean passband frequency.
Iir butterworth_bandpass(int order, double f_lo, double f_hi, double sample_rate);

std::vector<double> filter(const Iir& f, std::span<const double> x);

// Zero-phase filtering: forward-backward application with odd-reflection
// padding and steady-state initial conditions, so constant inputs produce
// exactly the filter's DC response without edge transients.
std::vector<double> filtfilt(const Iir& f, std::span<const double> x);

// Complex frequency response at digital frequency f (Hz).
std::complex<double> freq_response(const Iir& f, double freq, double sample_rate);

// ---------------------------------------------------------------------------
// Linear prediction.

// Levinson-Durbin on autocorrelation r[0..order]. Returns a[1..order] such
// that the prediction error filter is A(z) = 1 + sum a[k] z^-k.
std::vector<double> levinson(std::span<const double> r, int order, double* out_err = nullptr);

// Autocorrelation-method LPC of a frame (window applied internally).
std::vector<double> lpc_autocorrelation(std::span<const double> frame, int order,
                                        std::span<const double> window);

// Covariance-method LPC: minimizes the prediction error over the interior
// of the sequence without windowing. Returns a[1..order] (same convention).
std::vector<double> lpc_covariance(std::span<const double> x, int order);

// Prediction-error (inverse) filtering: e[n] = x[n] + sum a[k] x[n-k].
std::vector<double> inverse_filter(std::span<const double> x, std::span<const double> a);

// ---------------------------------------------------------------------------
// Hilbert band envelope: magnitude of the analytic signal restricted to
// [f_center - bw/2, f_center + bw/2]. FFT-domain construction.

std::vector<double> hilbert_band_envelope(std::span<const double> x, double sample_rate,
                                          double f_center, double bandwidth);

}  // namespace vowelmark::dsp
