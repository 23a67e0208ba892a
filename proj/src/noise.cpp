#include "vowelmark/noise.hpp"

#include <algorithm>
#include <cmath>

#include "vowelmark/dataset.hpp"
#include "vowelmark/dsp.hpp"
#include "vowelmark/util.hpp"

namespace vowelmark {

double hnr(const VoiceRecording& rec, const F0Contour& contour, const NoiseConfig& cfg) {
  const double fs = rec.sample_rate;
  const std::size_t win = static_cast<std::size_t>(std::lround(cfg.hnr_window * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(cfg.hnr_hop * fs));
  const std::size_t n = rec.samples.size();
  if (n < win) throw ComputeError("hnr: recording shorter than analysis window");

  const std::size_t lag_min = static_cast<std::size_t>(std::floor(fs / cfg.f_max));
  const std::size_t lag_max = std::min(win - 2, static_cast<std::size_t>(std::ceil(fs / cfg.f_min)));

  const auto window = dsp::hann_window(win);
  // ACF of the window itself corrects the lag-dependent energy loss.
  auto wacf = dsp::autocorrelation(window, lag_max + 1);
  for (std::size_t k = 1; k < wacf.size(); ++k) wacf[k] /= wacf[0];
  wacf[0] = 1.0;

  const std::size_t n_frames = (n - win) / hop + 1;
  double sum = 0.0;
  std::size_t voiced_frames = 0;

  std::vector<double> buf(win);
  for (std::size_t m = 0; m < n_frames; ++m) {
    // Voicing from the contour frame nearest this frame's center.
    const double center = static_cast<double>(m * hop) + static_cast<double>(win) / 2.0;
    const double c0 = contour.frames() ? (F0Contour::kStep * fs) : 1.0;
    const long idx = std::lround((center - cfg.hnr_window * fs / 2.0) / c0);
    const std::size_t ci = static_cast<std::size_t>(std::clamp<long>(idx, 0, static_cast<long>(contour.frames()) - 1));
    if (contour.frames() == 0 || !contour.voiced[ci]) continue;

    double mean = 0.0;
    for (std::size_t i = 0; i < win; ++i) mean += rec.samples[m * hop + i];
    mean /= static_cast<double>(win);
    for (std::size_t i = 0; i < win; ++i) buf[i] = (rec.samples[m * hop + i] - mean) * window[i];

    auto r = dsp::autocorrelation(buf, lag_max + 1);
    const double r0 = r[0];
    if (r0 <= 1e-30) continue;
    for (auto& v : r) v /= r0;
    for (std::size_t k = 1; k <= lag_max; ++k) r[k] = (wacf[k] > 1e-6) ? r[k] / wacf[k] : 0.0;

    // Highest local maximum in the lag band.
    double best = 0.0;
    bool found = false;
    for (std::size_t tau = std::max<std::size_t>(lag_min, 1); tau <= lag_max && tau + 1 < r.size(); ++tau) {
      if (r[tau] > r[tau - 1] && r[tau] >= r[tau + 1]) {
        const auto pk = dsp::refine_peak(r[tau - 1], r[tau], r[tau + 1]);
        if (!found || pk.value > best) {
          best = pk.value;
          found = true;
        }
      }
    }
    if (!found) continue;

    const double ac = std::clamp(best, 1e-6, 1.0 - 1e-6);
    double frame_hnr = 10.0 * std::log10(ac / (1.0 - ac));
    frame_hnr = std::clamp(frame_hnr, cfg.hnr_floor_db, cfg.hnr_ceil_db);
    sum += frame_hnr;
    ++voiced_frames;
  }

  if (voiced_frames == 0) throw ComputeError("hnr: no voiced frames");
  return std::clamp(sum / static_cast<double>(voiced_frames), cfg.hnr_floor_db, cfg.hnr_ceil_db);
}

// ---------------------------------------------------------------------------

std::vector<double> gne_frames(const VoiceRecording& rec, const NoiseConfig& cfg) {
  if (rec.duration() < 0.5) throw ComputeError("gne: recording shorter than 0.5 s");

  const VoiceRecording ds = resample(rec, cfg.gne_rate);
  const double fs = ds.sample_rate;
  const std::size_t win = static_cast<std::size_t>(std::lround(cfg.gne_window * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(cfg.gne_hop * fs));
  const std::size_t n = ds.samples.size();
  if (n < win) throw ComputeError("gne: too short after downsampling");

  const auto hamming = dsp::hamming_window(win);
  const int max_lag = std::max(1, static_cast<int>(std::lround(cfg.gne_max_lag * fs)));
  const double centers[3] = {500.0, 1500.0, 2500.0};

  const std::size_t n_frames = (n - win) / hop + 1;
  std::vector<double> out;
  out.reserve(n_frames);

  for (std::size_t m = 0; m < n_frames; ++m) {
    auto frame = std::span<const double>(ds.samples).subspan(m * hop, win);

    // LP inverse filtering (10th order, autocorrelation method).
    auto a = dsp::lpc_autocorrelation(frame, cfg.gne_lpc_order, hamming);
    auto resid = dsp::inverse_filter(frame, a);

    // Hilbert envelope per band.
    std::vector<std::vector<double>> env(3);
    for (int b = 0; b < 3; ++b) {
      env[b] = dsp::hilbert_band_envelope(resid, fs, centers[b], cfg.gne_bandwidth);
    }

    // Max normalized cross-correlation over qualifying pairs (all three:
    // every center difference is >= half the bandwidth) and small lags.
    double frame_gne = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const auto& x = env[i];
        const auto& y = env[j];
        const std::size_t len = x.size();
        double mx = 0.0, my = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
          mx += x[k];
          my += y[k];
        }
        mx /= static_cast<double>(len);
        my /= static_cast<double>(len);
        for (int lag = -max_lag; lag <= max_lag; ++lag) {
          double num = 0.0, ex = 0.0, ey = 0.0;
          for (std::size_t k = 0; k < len; ++k) {
            const long kk = static_cast<long>(k) + lag;
            if (kk < 0 || kk >= static_cast<long>(len)) continue;
            const double xv = x[k] - mx;
            const double yv = y[static_cast<std::size_t>(kk)] - my;
            num += xv * yv;
            ex += xv * xv;
            ey += yv * yv;
          }
          const double denom = std::sqrt(ex * ey);
          if (denom > 1e-30) frame_gne = std::max(frame_gne, num / denom);
        }
      }
    }
    out.push_back(std::clamp(frame_gne, 0.0, 1.0));
  }
  return out;
}

GneResult gne(const VoiceRecording& rec, const NoiseConfig& cfg) {
  const auto frames = gne_frames(rec, cfg);
  if (frames.empty()) throw ComputeError("gne: no frames");
  double mean = 0.0;
  for (double v : frames) mean += v;
  mean /= static_cast<double>(frames.size());
  double var = 0.0;
  for (double v : frames) var += (v - mean) * (v - mean);
  var /= static_cast<double>(frames.size());
  return {mean, std::sqrt(var)};
}

}  // namespace vowelmark
