#include "synthvoice.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "vowelmark/dataset.hpp"
#include "vowelmark/util.hpp"

namespace fs = std::filesystem;

namespace vowelmark::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// Band-limited impulse placement: windowed sinc, cutoff 0.45 fs.
void add_pulse(std::vector<double>& buf, double pos, double amp) {
  constexpr int kHalf = 16;
  constexpr double kCut = 0.9;  // x Nyquist
  const long lo = static_cast<long>(std::ceil(pos - kHalf));
  const long hi = static_cast<long>(std::floor(pos + kHalf));
  for (long k = std::max(0l, lo); k <= std::min(static_cast<long>(buf.size()) - 1, hi); ++k) {
    const double t = static_cast<double>(k) - pos;
    const double x = kCut * t;
    const double s = (std::abs(x) < 1e-9) ? 1.0 : std::sin(kPi * x) / (kPi * x);
    const double u = t / kHalf;
    const double w = 0.5 * (1.0 + std::cos(kPi * u));
    buf[static_cast<std::size_t>(k)] += amp * kCut * s * w;
  }
}

void one_pole_lowpass(std::vector<double>& x, double corner_hz, double fs) {
  const double a = std::exp(-2.0 * kPi * corner_hz / fs);
  double y = 0.0;
  for (auto& v : x) {
    y = (1.0 - a) * v + a * y;
    v = y;
  }
}

void resonator(std::vector<double>& x, double freq, double bw, double fs) {
  const double r = std::exp(-kPi * bw / fs);
  const double c = 2.0 * r * std::cos(2.0 * kPi * freq / fs);
  const double r2 = r * r;
  const double g = 1.0 - r;  // rough level control
  double y1 = 0.0, y2 = 0.0;
  for (auto& v : x) {
    const double y = g * v + c * y1 - r2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace

std::vector<double> phonation(const VoiceParams& p) {
  Rng rng(p.seed);
  const double fs = p.sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::lround(p.duration * fs));
  std::vector<double> buf(n, 0.0);

  // Slow random pitch wander: OU process on a 200 Hz grid, RMS-normalized.
  const std::size_t nw = static_cast<std::size_t>(std::lround(p.duration * 200.0)) + 2;
  std::vector<double> wander(nw, 0.0);
  {
    const double a = std::exp(-1.0 / (0.4 * 200.0));
    double w = 0.0;
    for (auto& v : wander) {
      w = a * w + rng.next_gauss();
      v = w;
    }
    double rms = 0.0;
    for (double v : wander) rms += v * v;
    rms = std::sqrt(rms / static_cast<double>(nw));
    const double scale = (rms > 1e-12) ? p.wander_cents / rms : 0.0;
    for (auto& v : wander) v *= scale;
  }
  auto wander_at = [&](double t) {
    const double idx = std::clamp(t * 200.0, 0.0, static_cast<double>(nw - 2));
    const std::size_t i = static_cast<std::size_t>(idx);
    const double frac = idx - static_cast<double>(i);
    return wander[i] + frac * (wander[i + 1] - wander[i]);
  };

  const double flutter_phase = rng.next_unit() * 2.0 * kPi;
  const double vibrato_phase = rng.next_unit() * 2.0 * kPi;

  double t = 0.010;
  while (t < p.duration - 0.010) {
    const double cents = p.vibrato_cents * std::sin(2.0 * kPi * p.vibrato_hz * t + vibrato_phase) +
                         p.flutter_cents * std::sin(2.0 * kPi * p.flutter_hz * t + flutter_phase) +
                         wander_at(t);
    const double f_inst = p.f0 * std::pow(2.0, cents / 1200.0);
    const double period = (1.0 + p.jitter_pct / 100.0 * rng.next_gauss()) / f_inst;
    const double amp = (1.0 + p.shimmer_pct / 100.0 * rng.next_gauss()) *
                       (1.0 + p.am_depth * std::sin(2.0 * kPi * p.am_hz * t));
    add_pulse(buf, t * fs, std::max(amp, 0.05));
    t += std::max(period, 0.3 / p.f0);
  }

  one_pole_lowpass(buf, p.tilt_corner_hz, fs);
  one_pole_lowpass(buf, p.tilt_corner_hz, fs);

  for (std::size_t i = 0; i < 4; ++i) {
    if (p.formants[i] > 0.0 && p.formants[i] < fs / 2) {
      resonator(buf, p.formants[i], p.bandwidths[i], fs);
    }
  }

  // Aspiration noise through the same vocal-tract filters, mixed at the
  // requested voiced-to-noise ratio.
  if (p.noise_snr_db < 200.0) {
    std::vector<double> noise(n);
    for (auto& v : noise) v = rng.next_gauss();
    for (std::size_t i = 0; i < 4; ++i) {
      if (p.formants[i] > 0.0 && p.formants[i] < fs / 2) {
        resonator(noise, p.formants[i], p.bandwidths[i], fs);
      }
    }
    double ev = 0.0, en = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ev += buf[i] * buf[i];
      en += noise[i] * noise[i];
    }
    if (en > 0.0 && ev > 0.0) {
      const double g = std::sqrt(ev / en) * std::pow(10.0, -p.noise_snr_db / 20.0);
      for (std::size_t i = 0; i < n; ++i) buf[i] += g * noise[i];
    }
  }

  double peak = 0.0;
  for (double v : buf) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    const double g = p.peak / peak;
    for (auto& v : buf) v *= g;
  }
  return buf;
}

// ---------------------------------------------------------------------------

std::vector<double> harmonic_train(double sample_rate, double duration, double f0,
                                   int n_harmonics, double amplitude) {
  const std::size_t n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double acc = 0.0;
    for (int h = 1; h <= n_harmonics; ++h) acc += std::cos(2.0 * kPi * f0 * h * t);
    out[i] = amplitude * acc / static_cast<double>(n_harmonics);
  }
  return out;
}

std::vector<double> harmonic_sum(double sample_rate, double duration, double f0,
                                 const std::vector<double>& harmonic_amps) {
  const std::size_t n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double acc = 0.0;
    for (std::size_t h = 0; h < harmonic_amps.size(); ++h) {
      acc += harmonic_amps[h] * std::sin(2.0 * kPi * f0 * static_cast<double>(h + 1) * t);
    }
    out[i] = acc;
  }
  return out;
}

std::vector<double> falling_sawtooth(double sample_rate, double duration, int period_samples,
                                     double amplitude) {
  const std::size_t n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int ph = static_cast<int>(i % static_cast<std::size_t>(period_samples));
    out[i] = amplitude * (1.0 - 2.0 * static_cast<double>(ph) / static_cast<double>(period_samples));
  }
  return out;
}

std::vector<double> fm_sine(double sample_rate, double duration, double f0, double mod_hz,
                            double mod_depth) {
  const std::size_t n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  std::vector<double> out(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f0 * (1.0 + mod_depth * std::sin(2.0 * kPi * mod_hz * t));
    out[i] = 0.5 * std::sin(phase);
    phase += 2.0 * kPi * f / sample_rate;
  }
  return out;
}

std::vector<double> linear_glide(double sample_rate, double duration, double f_start,
                                 double f_end) {
  const std::size_t n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  std::vector<double> out(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f_start + (f_end - f_start) * t / duration;
    out[i] = 0.5 * std::sin(phase);
    phase += 2.0 * kPi * f / sample_rate;
  }
  return out;
}

std::vector<double> white_noise(double sample_rate, double duration, std::uint64_t seed,
                                double amplitude) {
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  std::vector<double> out(n);
  for (auto& v : out) v = std::clamp(amplitude * rng.next_gauss(), -1.0, 1.0);
  return out;
}

VoiceRecording as_recording(std::vector<double> samples, double sample_rate,
                            const std::string& subject, Vowel vowel, Label label) {
  VoiceRecording rec;
  rec.samples = std::move(samples);
  rec.sample_rate = sample_rate;
  rec.subject_id = subject;
  rec.vowel = vowel;
  rec.label = label;
  return rec;
}

// ---------------------------------------------------------------------------

namespace {

struct SubjectSpec {
  std::string id;
  Label label = Label::HC;
  double severity = 0.0;  // 0 healthy, up to 1 strongly affected
  bool early = false;
};

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.next_unit(); }

}  // namespace

CorpusPaths make_demo_corpus(const std::string& dir, std::uint64_t seed, int n_hc, int n_als,
                             int n_early) {
  fs::create_directories(fs::path(dir) / "norm");
  fs::create_directories(fs::path(dir) / "als");

  std::vector<SubjectSpec> subjects;
  char idbuf[16];
  for (int i = 0; i < n_hc; ++i) {
    std::snprintf(idbuf, sizeof(idbuf), "H%02d", i + 1);
    subjects.push_back({idbuf, Label::HC, 0.0, false});
  }
  for (int i = 0; i < n_als; ++i) {
    std::snprintf(idbuf, sizeof(idbuf), "P%02d", i + 1);
    SubjectSpec s;
    s.id = idbuf;
    s.label = Label::ALS;
    s.early = i < n_early;
    subjects.push_back(s);
  }

  std::vector<ManifestEntry> entries, early_entries;

  for (std::size_t si = 0; si < subjects.size(); ++si) {
    auto& sub = subjects[si];
    Rng rng = Rng::sub(seed, si + 1);

    if (sub.label == Label::ALS) {
      sub.severity = sub.early ? uniform(rng, 0.25, 0.55) : uniform(rng, 0.55, 1.0);
    }
    const double s = sub.severity;

    const bool female = (si % 2) == 1;
    const double f0 = female ? uniform(rng, 175.0, 225.0) : uniform(rng, 105.0, 145.0);
    const double fscale = female ? 1.12 : 1.0;

    // Subject-level voice character; the severity channels get independent
    // per-subject variation so no single feature separates perfectly.
    const double vibrato_cents = uniform(rng, 4.0, 12.0);
    const double vibrato_hz = uniform(rng, 4.2, 6.0);
    const double flutter_cents = uniform(rng, 0.0, 2.5) + s * uniform(rng, 14.0, 42.0);
    const double flutter_hz = uniform(rng, 9.5, 13.5);
    const double wander_cents = uniform(rng, 4.0, 14.0) + s * uniform(rng, 14.0, 45.0);
    const double jitter_pct = uniform(rng, 0.15, 0.45) * (1.0 + s * uniform(rng, 1.0, 3.0));
    const double shimmer_pct = uniform(rng, 0.8, 2.5) * (1.0 + s * uniform(rng, 1.0, 2.5));
    const double am_depth = uniform(rng, 0.01, 0.05) + s * uniform(rng, 0.08, 0.22);
    const double noise_snr = uniform(rng, 24.0, 34.0) - s * uniform(rng, 8.0, 18.0);
    const double tilt = uniform(rng, 500.0, 800.0);
    const double centralization = s * uniform(rng, 0.5, 0.9);
    const double bw_widen = 1.0 + s * uniform(rng, 0.3, 0.9);

    for (Vowel vowel : {Vowel::A, Vowel::I}) {
      VoiceParams p;
      p.sample_rate = 44100.0;
      p.duration = uniform(rng, 3.2, 4.8);
      p.f0 = f0 * uniform(rng, 0.97, 1.03);
      p.vibrato_hz = vibrato_hz;
      p.vibrato_cents = vibrato_cents;
      p.flutter_hz = flutter_hz;
      p.flutter_cents = flutter_cents;
      p.wander_cents = wander_cents;
      p.jitter_pct = jitter_pct;
      p.shimmer_pct = shimmer_pct;
      p.am_depth = am_depth;
      p.am_hz = uniform(rng, 2.0, 5.0);
      p.noise_snr_db = noise_snr;
      p.tilt_corner_hz = tilt;
      p.seed = rng.next_u64();

      if (vowel == Vowel::A) {
        p.formants = {fscale * (710.0 + 40.0 * rng.next_gauss()),
                      fscale * (1150.0 + 60.0 * rng.next_gauss()),
                      fscale * (2550.0 + 90.0 * rng.next_gauss()), fscale * 3400.0};
      } else {
        p.formants = {fscale * (300.0 + 25.0 * rng.next_gauss()),
                      fscale * (2300.0 + 90.0 * rng.next_gauss()),
                      fscale * (2950.0 + 90.0 * rng.next_gauss()), fscale * 3500.0};
      }
      // Vowel centralization toward a mid vowel.
      const double t1 = fscale * 500.0, t2 = fscale * 1500.0;
      p.formants[0] += centralization * (t1 - p.formants[0]);
      p.formants[1] += centralization * (t2 - p.formants[1]);
      p.bandwidths = {90.0 * bw_widen, 110.0 * bw_widen, 170.0 * bw_widen, 220.0 * bw_widen};

      const auto samples = phonation(p);
      const std::string cls = sub.label == Label::ALS ? "als" : "norm";
      const std::string rel = cls + "/" + sub.id + "_" + vowel_char(vowel) + ".wav";
      wav_write_pcm16((fs::path(dir) / rel).string(), samples, p.sample_rate);

      ManifestEntry e;
      e.subject_id = sub.id;
      e.vowel = vowel;
      e.label = sub.label;
      e.path = rel;
      entries.push_back(e);
      if (sub.label == Label::HC || sub.early) early_entries.push_back(e);
    }
  }

  CorpusPaths paths;
  paths.manifest = (fs::path(dir) / "manifest.csv").string();
  paths.early_manifest = (fs::path(dir) / "manifest_early.csv").string();
  write_manifest(paths.manifest, entries);
  write_manifest(paths.early_manifest, early_entries);
  return paths;
}

}  // namespace vowelmark::synth
