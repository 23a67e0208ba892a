#include "vowelmark/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>

#include "vowelmark/dsp.hpp"
#include "vowelmark/util.hpp"

namespace vowelmark {

namespace {

struct Candidate {
  double lag = 0.0;   // fractional samples
  double rho = 0.0;   // normalized correlation peak value
};

// Normalized cross-correlation function of one frame (RAPT style): numerator
// over a fixed correlation length K via FFT, energies via prefix sums.
std::vector<double> nccf(std::span<const double> frame, std::size_t corr_len, std::size_t max_lag) {
  const std::size_t w = frame.size();
  std::vector<double> y(frame.begin(), frame.end());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(w);
  for (double& v : y) v -= mean;

  std::size_t m = 1;
  while (m < w + max_lag + 1) m <<= 1;

  std::vector<std::complex<double>> a(m, 0.0), b(m, 0.0);
  for (std::size_t i = 0; i < corr_len; ++i) a[i] = y[i];
  for (std::size_t i = 0; i < w; ++i) b[i] = y[i];
  auto fa = dsp::fft(std::span<const std::complex<double>>(a));
  auto fb = dsp::fft(std::span<const std::complex<double>>(b));
  for (std::size_t i = 0; i < m; ++i) fa[i] = std::conj(fa[i]) * fb[i];
  auto cc = dsp::ifft(std::span<const std::complex<double>>(fa));

  std::vector<double> ps(w + 1, 0.0);
  for (std::size_t i = 0; i < w; ++i) ps[i + 1] = ps[i] + y[i] * y[i];
  const double e0 = ps[corr_len] - ps[0];

  std::vector<double> out(max_lag + 1, 0.0);
  for (std::size_t tau = 0; tau <= max_lag && tau + corr_len <= w; ++tau) {
    const double et = ps[tau + corr_len] - ps[tau];
    const double denom = std::sqrt(e0 * et);
    out[tau] = (denom > 1e-30) ? cc[tau].real() / denom : 0.0;
  }
  return out;
}

std::vector<Candidate> frame_candidates(const std::vector<double>& r, std::size_t lag_min,
                                        std::size_t lag_max, std::size_t keep) {
  std::vector<Candidate> cands;
  for (std::size_t tau = std::max<std::size_t>(lag_min, 1); tau <= lag_max && tau + 1 < r.size();
       ++tau) {
    if (r[tau] > r[tau - 1] && r[tau] >= r[tau + 1]) {
      auto pk = dsp::refine_peak(r[tau - 1], r[tau], r[tau + 1]);
      Candidate c;
      c.lag = static_cast<double>(tau) + pk.offset;
      c.rho = std::min(pk.value, 1.0);
      cands.push_back(c);
    }
  }
  if (cands.empty()) {
    // No interior local maximum; fall back to the best raw lag so the
    // Viterbi stays connected. Almost always an unvoiced frame.
    std::size_t best = lag_min;
    for (std::size_t tau = lag_min; tau <= lag_max && tau < r.size(); ++tau) {
      if (r[tau] > r[best]) best = tau;
    }
    cands.push_back({static_cast<double>(best), std::max(0.0, best < r.size() ? r[best] : 0.0)});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.rho > b.rho;
  });
  if (cands.size() > keep) cands.resize(keep);
  return cands;
}

}  // namespace

F0Contour track_f0(const VoiceRecording& rec, const PitchConfig& cfg) {
  const double fs = rec.sample_rate;
  if (fs <= 0 || rec.samples.empty()) throw InputError("track_f0: empty recording");
  if (rec.duration() < 0.5) {
    throw ComputeError("track_f0: recording shorter than 0.5 s (" +
                       std::to_string(rec.duration()) + " s)");
  }

  const std::size_t win = static_cast<std::size_t>(std::lround(cfg.window * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(cfg.step * fs));
  const std::size_t lag_min = static_cast<std::size_t>(std::floor(fs / cfg.f_max));
  const std::size_t lag_max = static_cast<std::size_t>(std::ceil(fs / cfg.f_min));
  if (lag_max + 1 >= win) throw InputError("track_f0: window too short for f_min");
  const std::size_t corr_len = win - lag_max;

  const std::size_t n = rec.samples.size();
  if (n < win) throw ComputeError("track_f0: recording shorter than analysis window");
  const std::size_t n_frames = (n - win) / hop + 1;

  std::vector<std::vector<Candidate>> cands(n_frames);
  for (std::size_t m = 0; m < n_frames; ++m) {
    auto frame = std::span<const double>(rec.samples).subspan(m * hop, win);
    auto r = nccf(frame, corr_len, lag_max);
    cands[m] = frame_candidates(r, lag_min, lag_max, 8);
  }

  // Viterbi over per-frame candidates. Local cost 1 - rho with a bias toward
  // shorter lags (a periodic signal correlates equally well at 2T, and under
  // noise the 2T peak can edge ahead by chance); transition cost penalizes
  // octave jumps.
  const double kLagBias = 0.05;
  std::vector<std::vector<double>> cost(n_frames);
  std::vector<std::vector<int>> back(n_frames);
  for (std::size_t m = 0; m < n_frames; ++m) {
    const auto& cs = cands[m];
    cost[m].assign(cs.size(), 0.0);
    back[m].assign(cs.size(), -1);
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const double f = fs / cs[c].lag;
      const double local = (1.0 - cs[c].rho) + kLagBias * std::log2(cfg.f_max / f);
      if (m == 0) {
        cost[m][c] = local;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      int best_prev = 0;
      for (std::size_t p = 0; p < cands[m - 1].size(); ++p) {
        const double fp = fs / cands[m - 1][p].lag;
        const double trans = cfg.octave_cost * std::abs(std::log2(f / fp));
        const double v = cost[m - 1][p] + trans;
        if (v < best) {
          best = v;
          best_prev = static_cast<int>(p);
        }
      }
      cost[m][c] = best + local;
      back[m][c] = best_prev;
    }
  }

  std::vector<int> path(n_frames, 0);
  {
    const auto& last = cost[n_frames - 1];
    path[n_frames - 1] =
        static_cast<int>(std::min_element(last.begin(), last.end()) - last.begin());
    for (std::size_t m = n_frames - 1; m > 0; --m) {
      path[m - 1] = back[m][path[m]];
    }
  }

  F0Contour contour;
  contour.f0.assign(n_frames, 0.0);
  contour.voiced.assign(n_frames, 0);
  double sum_f0 = 0.0, sum_rho = 0.0;
  std::size_t voiced = 0;
  for (std::size_t m = 0; m < n_frames; ++m) {
    const Candidate& c = cands[m][path[m]];
    sum_rho += c.rho;
    if (c.rho >= cfg.voicing_threshold) {
      contour.f0[m] = fs / c.lag;
      contour.voiced[m] = 1;
      sum_f0 += contour.f0[m];
      ++voiced;
    }
  }
  contour.mean_f0 = voiced ? sum_f0 / static_cast<double>(voiced) : 0.0;

  const double fraction = static_cast<double>(voiced) / static_cast<double>(n_frames);
  if (fraction < cfg.min_voiced_fraction) {
    throw ComputeError("unvoiceable recording: " + std::to_string(100.0 * fraction) +
                       "% voiced frames (mean correlation " +
                       std::to_string(sum_rho / static_cast<double>(n_frames)) + ")");
  }
  return contour;
}

// ---------------------------------------------------------------------------

namespace {

// Linear interpolation of the contour across unvoiced gaps, evaluated at an
// arbitrary sample position. Frame m is centered at m*hop + win/2.
class LocalPeriod {
 public:
  LocalPeriod(const F0Contour& c, double fs, const PitchConfig& cfg) : fs_(fs) {
    hop_ = cfg.step * fs;
    center0_ = cfg.window * fs / 2.0;
    for (std::size_t m = 0; m < c.frames(); ++m) {
      if (c.voiced[m]) {
        frames_.push_back(static_cast<double>(m));
        values_.push_back(c.f0[m]);
      }
    }
  }

  bool empty() const { return values_.empty(); }

  double first_center() const { return center0_ + frames_.front() * hop_; }
  double last_center() const { return center0_ + frames_.back() * hop_; }

  // Period in samples at sample position p.
  double period_at(double p) const {
    const double m = (p - center0_) / hop_;
    if (m <= frames_.front()) return fs_ / values_.front();
    if (m >= frames_.back()) return fs_ / values_.back();
    auto it = std::lower_bound(frames_.begin(), frames_.end(), m);
    const std::size_t hi = static_cast<std::size_t>(it - frames_.begin());
    const std::size_t lo = hi - 1;
    const double t = (m - frames_[lo]) / (frames_[hi] - frames_[lo]);
    const double f = values_[lo] + t * (values_[hi] - values_[lo]);
    return fs_ / f;
  }

 private:
  double fs_, hop_, center0_;
  std::vector<double> frames_;
  std::vector<double> values_;
};

double ncc_segments(std::span<const double> s, long a, long b, long len) {
  double num = 0.0, ea = 0.0, eb = 0.0;
  for (long i = 0; i < len; ++i) {
    const double x = s[static_cast<std::size_t>(a + i)];
    const double y = s[static_cast<std::size_t>(b + i)];
    num += x * y;
    ea += x * x;
    eb += y * y;
  }
  const double denom = std::sqrt(ea * eb);
  return denom > 1e-30 ? num / denom : 0.0;
}

// Local positive-peak landmark nearest to position p within +-radius.
long snap_to_peak(std::span<const double> s, long p, long radius) {
  const long lo = std::max(0l, p - radius);
  const long hi = std::min(static_cast<long>(s.size()) - 1, p + radius);
  long best = p;
  double best_v = -std::numeric_limits<double>::infinity();
  for (long i = lo; i <= hi; ++i) {
    if (s[static_cast<std::size_t>(i)] > best_v) {
      best_v = s[static_cast<std::size_t>(i)];
      best = i;
    }
  }
  return best;
}

}  // namespace

PeriodSegmentation segment_periods(const VoiceRecording& rec, const F0Contour& contour,
                                   const PitchConfig& cfg) {
  const double fs = rec.sample_rate;
  const auto& s = rec.samples;
  const long n = static_cast<long>(s.size());

  LocalPeriod local(contour, fs, cfg);
  if (local.empty()) throw ComputeError("segment_periods: contour has no voiced frames");

  const long span_lo = std::max(0l, static_cast<long>(std::floor(local.first_center() - cfg.window * fs / 2.0)));
  const long span_hi = std::min(n, static_cast<long>(std::ceil(local.last_center() + cfg.window * fs / 2.0)));

  // Seed at the strongest positive peak of the voiced span.
  long seed = span_lo;
  double seed_v = -std::numeric_limits<double>::infinity();
  for (long i = span_lo; i < span_hi; ++i) {
    if (s[static_cast<std::size_t>(i)] > seed_v) {
      seed_v = s[static_cast<std::size_t>(i)];
      seed = i;
    }
  }

  const double t_lo = fs / cfg.f_max, t_hi = fs / cfg.f_min;

  auto march = [&](long from, int dir, std::vector<long>& out) {
    long b = from;
    double prev_period = 0.0;
    for (;;) {
      const double t_local = local.period_at(static_cast<double>(b));
      const long len = static_cast<long>(std::lround(t_local));
      const long pred = b + dir * len;
      const long radius = static_cast<long>(std::lround(0.25 * t_local));

      // Every index the matching and snapping can touch must be in range.
      const long lo_needed = std::min(b, pred - radius);
      const long hi_needed = std::max(b + len, pred + radius + len);
      if (lo_needed < 0 || hi_needed >= n) break;
      if (pred < span_lo || pred > span_hi) break;

      // Waveform matching: correlate one full cycle at the candidate against
      // the cycle anchored at the current boundary.
      long best = pred;
      double best_ncc = -2.0;
      const long ref = (dir > 0) ? b : b;  // cycle starting at current boundary
      for (long q = pred - radius; q <= pred + radius; ++q) {
        const double v = ncc_segments(s, ref, q, len);
        if (v > best_ncc) {
          best_ncc = v;
          best = q;
        }
      }

      const long snapped = snap_to_peak(s, best, std::max(1l, static_cast<long>(std::lround(0.15 * t_local))));

      auto acceptable = [&](long q) {
        const double period = static_cast<double>(dir > 0 ? q - b : b - q);
        if (period < t_lo || period > t_hi) return false;
        if (std::abs(period / t_local - 1.0) > 0.20) return false;
        if (prev_period > 0.0) {
          const double ratio = period / prev_period;
          if (ratio < 0.5 || ratio > 2.0) return false;
        }
        return true;
      };

      long next;
      if (acceptable(snapped)) {
        next = snapped;
      } else if (acceptable(best)) {
        next = best;
      } else {
        next = pred;  // keep marching on the contour's say-so
      }

      out.push_back(next);
      prev_period = static_cast<double>(dir > 0 ? next - b : b - next);
      b = next;
    }
  };

  std::vector<long> right, left;
  march(seed, +1, right);
  march(seed, -1, left);

  std::vector<long> bounds;
  bounds.reserve(left.size() + right.size() + 1);
  for (auto it = left.rbegin(); it != left.rend(); ++it) bounds.push_back(*it);
  bounds.push_back(seed);
  for (long v : right) bounds.push_back(v);

  PeriodSegmentation seg;
  for (long b : bounds) seg.boundaries.push_back(static_cast<std::size_t>(b));
  const std::size_t n_cycles = seg.boundaries.size() >= 1 ? seg.boundaries.size() - 1 : 0;
  if (n_cycles < 30) {
    throw ComputeError("insufficient cycles: " + std::to_string(n_cycles) + " < 30");
  }

  seg.t0.resize(n_cycles);
  seg.amp.resize(n_cycles);
  for (std::size_t i = 0; i < n_cycles; ++i) {
    const std::size_t lo = seg.boundaries[i], hi = seg.boundaries[i + 1];
    seg.t0[i] = static_cast<double>(hi - lo) / fs;
    double a = 0.0;
    for (std::size_t j = lo; j < hi; ++j) a = std::max(a, std::abs(s[j]));
    seg.amp[i] = a;
  }
  return seg;
}

void dump_contour(const F0Contour& contour, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "time_s,f0_hz,voiced\n";
  for (std::size_t m = 0; m < contour.frames(); ++m) {
    out << format_double(static_cast<double>(m) * F0Contour::kStep) << ','
        << format_double(contour.f0[m]) << ',' << static_cast<int>(contour.voiced[m]) << '\n';
  }
}

void dump_segmentation(const PeriodSegmentation& seg, double sample_rate, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "boundary_sample,boundary_s,t0_s,amp\n";
  for (std::size_t i = 0; i < seg.boundaries.size(); ++i) {
    out << seg.boundaries[i] << ',' << format_double(seg.boundaries[i] / sample_rate) << ',';
    if (i < seg.t0.size()) {
      out << format_double(seg.t0[i]) << ',' << format_double(seg.amp[i]);
    } else {
      out << ",";
    }
    out << '\n';
  }
}

}  // namespace vowelmark
