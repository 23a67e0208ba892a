#include "vowelmark/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "vowelmark/dataset.hpp"
#include "vowelmark/dsp.hpp"
#include "vowelmark/util.hpp"

namespace vowelmark {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogFloor = 1e-30;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular mel filterbank over [0, f_max], area-normalized per band so a
// flat magnitude spectrum produces identical band energies.
std::vector<std::vector<double>> mel_filterbank(std::size_t n_bins, double bin_hz, double f_max) {
  const double mel_max = hz_to_mel(f_max);
  std::vector<double> edges(kNumMelBands + 2);
  for (int i = 0; i < kNumMelBands + 2; ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / (kNumMelBands + 1));
  }

  std::vector<std::vector<double>> fb(kNumMelBands, std::vector<double>(n_bins, 0.0));
  for (int k = 0; k < kNumMelBands; ++k) {
    const double lo = edges[k], mid = edges[k + 1], hi = edges[k + 2];
    double sum = 0.0;
    for (std::size_t j = 0; j < n_bins; ++j) {
      const double f = bin_hz * static_cast<double>(j);
      double w = 0.0;
      if (f > lo && f < mid) w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi) w = (hi - f) / (hi - mid);
      fb[k][j] = w;
      sum += w;
    }
    if (sum > 0) {
      for (auto& w : fb[k]) w /= sum;
    }
  }
  return fb;
}

}  // namespace

std::vector<double> mel_cepstrum(std::span<const double> band_energies, int order) {
  const int m_bands = static_cast<int>(band_energies.size());
  std::vector<double> out(order, 0.0);
  for (int m = 1; m <= order; ++m) {
    double acc = 0.0;
    for (int k = 1; k <= m_bands; ++k) {
      const double s = std::max(band_energies[k - 1], kLogFloor);
      acc += std::log(s) * std::cos(m * (k - 0.5) * kPi / m_bands);
    }
    out[m - 1] = acc;
  }
  return out;
}

std::vector<std::array<double, kNumCepstra>> mfcc_frames(const VoiceRecording& rec,
                                                         const SpectralConfig& cfg) {
  const double fs = rec.sample_rate;
  const std::size_t win = static_cast<std::size_t>(std::lround(cfg.mfcc_window * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(cfg.mfcc_hop * fs));
  if (rec.samples.size() < win) throw ComputeError("mfcc: recording shorter than analysis window");

  std::size_t nfft = 1;
  while (nfft < 2 * win) nfft <<= 1;
  const double bin_hz = fs / static_cast<double>(nfft);
  const std::size_t n_bins = static_cast<std::size_t>(std::floor(cfg.f_max / bin_hz)) + 1;

  const auto window = dsp::hamming_window(win);
  const auto fb = mel_filterbank(n_bins, bin_hz, cfg.f_max);

  const std::size_t n_frames = (rec.samples.size() - win) / hop + 1;
  std::vector<std::array<double, kNumCepstra>> frames(n_frames);

  std::vector<double> buf(nfft, 0.0);
  for (std::size_t m = 0; m < n_frames; ++m) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < win; ++i) buf[i] = rec.samples[m * hop + i] * window[i];
    auto spec = dsp::fft(std::span<const double>(buf));

    std::vector<double> mag(n_bins);
    for (std::size_t j = 0; j < n_bins; ++j) mag[j] = std::abs(spec[j]);

    std::vector<double> bands(kNumMelBands, 0.0);
    for (int k = 0; k < kNumMelBands; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n_bins; ++j) acc += fb[k][j] * mag[j];
      bands[k] = acc;
    }
    auto ceps = mel_cepstrum(bands, kNumCepstra);
    for (int c = 0; c < kNumCepstra; ++c) frames[m][c] = ceps[c];
  }
  return frames;
}

std::array<double, kNumCepstra> mfcc(const VoiceRecording& rec, const SpectralConfig& cfg) {
  const auto frames = mfcc_frames(rec, cfg);
  std::array<double, kNumCepstra> avg{};
  for (const auto& f : frames) {
    for (int c = 0; c < kNumCepstra; ++c) avg[c] += f[c];
  }
  for (int c = 0; c < kNumCepstra; ++c) avg[c] /= static_cast<double>(frames.size());
  return avg;
}

std::array<double, kNumCepstra> delta_mfcc(
    std::span<const std::array<double, kNumCepstra>> frame_mfccs) {
  const std::size_t n = frame_mfccs.size();
  if (n < 5) throw ComputeError("delta_mfcc: needs at least 5 frames");

  // Regression deltas over +-2 frames; valid centers only.
  std::array<double, kNumCepstra> acc{};
  const double denom = 10.0;  // 2 * (1^2 + 2^2)
  for (std::size_t t = 2; t + 2 < n; ++t) {
    for (int c = 0; c < kNumCepstra; ++c) {
      const double d = (frame_mfccs[t + 1][c] - frame_mfccs[t - 1][c]) +
                       2.0 * (frame_mfccs[t + 2][c] - frame_mfccs[t - 2][c]);
      acc[c] += std::abs(d / denom);
    }
  }
  const double count = static_cast<double>(n - 4);
  for (int c = 0; c < kNumCepstra; ++c) acc[c] /= count;
  return acc;
}

// ---------------------------------------------------------------------------

SpectralEnvelope spectral_envelope(const VoiceRecording& rec, const SpectralConfig& cfg) {
  // All-pole fit to the time-averaged power spectrum at the analysis rate.
  // The rate conversion uses a transition band centered at Nyquist so the
  // envelope stays meaningful all the way up to f_max.
  VoiceRecording ds = rec;
  if (rec.sample_rate != cfg.envelope_rate) {
    ds.samples = dsp::resample_sinc(rec.samples, rec.sample_rate, cfg.envelope_rate, 0.5);
    ds.sample_rate = cfg.envelope_rate;
  }
  const double fs = ds.sample_rate;
  const std::size_t win = static_cast<std::size_t>(std::lround(0.030 * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(0.010 * fs));
  if (ds.samples.size() < win) throw ComputeError("spectral_envelope: recording too short");

  std::size_t nfft = 1;
  while (nfft < 2 * win) nfft <<= 1;

  const auto window = dsp::hamming_window(win);
  std::vector<double> avg_power(nfft / 2 + 1, 0.0);
  const std::size_t n_frames = (ds.samples.size() - win) / hop + 1;

  std::vector<double> buf(nfft, 0.0);
  for (std::size_t m = 0; m < n_frames; ++m) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < win; ++i) buf[i] = ds.samples[m * hop + i] * window[i];
    auto spec = dsp::fft(std::span<const double>(buf));
    for (std::size_t j = 0; j < avg_power.size(); ++j) avg_power[j] += std::norm(spec[j]);
  }
  for (auto& v : avg_power) v /= static_cast<double>(n_frames);

  // Autocorrelation = IDFT of the (symmetrized) power spectrum.
  std::vector<std::complex<double>> full(nfft);
  for (std::size_t j = 0; j < avg_power.size(); ++j) full[j] = avg_power[j];
  for (std::size_t j = avg_power.size(); j < nfft; ++j) full[j] = avg_power[nfft - j];
  auto ac_c = dsp::ifft(std::span<const std::complex<double>>(full));

  const int order = cfg.envelope_order;
  std::vector<double> r(order + 1);
  for (int k = 0; k <= order; ++k) r[k] = ac_c[static_cast<std::size_t>(k)].real();

  // Regularize until the model is stable (all prediction-error filter roots
  // inside the unit circle in the Levinson sense: |k| < 1 keeps err > 0).
  double err = 0.0;
  std::vector<double> a;
  double ridge = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    std::vector<double> rr(r);
    rr[0] *= (1.0 + ridge);
    a = dsp::levinson(rr, order, &err);
    if (err > 1e-280 && r[0] > 0) break;
    ridge = (ridge == 0.0) ? 1e-9 : ridge * 100.0;
  }
  const double gain = std::sqrt(std::max(err, 1e-280));

  SpectralEnvelope env;
  env.f_lo = 0.0;
  env.f_hi = cfg.f_max;
  env.db.resize(cfg.envelope_points);
  for (int k = 0; k < cfg.envelope_points; ++k) {
    const double f = env.f_lo + (env.f_hi - env.f_lo) * static_cast<double>(k) /
                                    static_cast<double>(cfg.envelope_points - 1);
    const double w = 2.0 * kPi * f / fs;
    std::complex<double> az = 1.0;
    std::complex<double> zk = 1.0;
    const std::complex<double> zinv = std::exp(std::complex<double>(0.0, -w));
    for (int i = 0; i < order; ++i) {
      zk *= zinv;
      az += a[static_cast<std::size_t>(i)] * zk;
    }
    const double mag = gain / std::max(std::abs(az), 1e-150);
    env.db[static_cast<std::size_t>(k)] = 20.0 * std::log10(std::max(mag, 1e-150));
  }

  // Remove the mean level: the envelope is a shape, not a loudness.
  double mean = 0.0;
  for (double v : env.db) mean += v;
  mean /= static_cast<double>(env.db.size());
  for (double& v : env.db) v -= mean;
  return env;
}

double envelope_distance(const SpectralEnvelope& a, const SpectralEnvelope& b) {
  if (a.db.size() != b.db.size()) throw InputError("envelope_distance: envelopes differ in length");
  if (a.db.empty()) throw InputError("envelope_distance: empty envelope");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.db.size(); ++k) acc += std::abs(a.db[k] - b.db[k]);
  return acc / static_cast<double>(a.db.size());
}

std::optional<double> second_formant(const SpectralEnvelope& env, Vowel vowel) {
  const double band_lo = (vowel == Vowel::I) ? 1500.0 : 900.0;
  const double band_hi = (vowel == Vowel::I) ? 3200.0 : 1800.0;

  struct Peak {
    double freq;
    double value;
  };
  std::vector<Peak> peaks;
  for (std::size_t k = 1; k + 1 < env.db.size(); ++k) {
    if (env.db[k] > env.db[k - 1] && env.db[k] >= env.db[k + 1]) {
      const auto pk = dsp::refine_peak(env.db[k - 1], env.db[k], env.db[k + 1]);
      const double step = env.frequency_at(1) - env.frequency_at(0);
      const double f = env.frequency_at(k) + pk.offset * step;
      if (f > 250.0) peaks.push_back({f, pk.value});
    }
  }
  if (peaks.empty()) return std::nullopt;

  // Second peak above 250 Hz when it lands in the vowel band; otherwise the
  // first in-band peak.
  if (peaks.size() >= 2 && peaks[1].freq >= band_lo && peaks[1].freq <= band_hi) {
    return peaks[1].freq;
  }
  for (const auto& p : peaks) {
    if (p.freq >= band_lo && p.freq <= band_hi) return p.freq;
  }
  return std::nullopt;
}

}  // namespace vowelmark
