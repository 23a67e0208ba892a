#include "vowelmark/extract.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>

#include "vowelmark/contour.hpp"
#include "vowelmark/harmonics.hpp"
#include "vowelmark/noise.hpp"
#include "vowelmark/perturb.hpp"
#include "vowelmark/pitch.hpp"
#include "vowelmark/spectral.hpp"
#include "vowelmark/util.hpp"

namespace vowelmark {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Everything one vowel recording contributes, plus the envelope/F2 needed
// for the joint features.
struct VowelResult {
  std::map<std::string, double> features;  // bare names, no vowel suffix
  std::optional<SpectralEnvelope> envelope;
  std::optional<double> f2;
  RecordingLog log;
};

void note_failure(VowelResult& out, const std::string& stage, const std::exception& e) {
  if (!out.log.status.empty() && out.log.status != "ok") out.log.status += "; ";
  if (out.log.status == "ok") out.log.status.clear();
  out.log.status += stage + ": " + e.what();
  log_warn(out.log.subject_id + "/" + out.log.vowel + " " + stage + ": " + e.what());
}

VowelResult process_recording(const ManifestEntry& entry) {
  VowelResult out;
  out.log.subject_id = entry.subject_id;
  out.log.vowel = vowel_char(entry.vowel);
  out.log.status = "ok";

  auto& f = out.features;
  auto set_missing = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) f.emplace(n, kNaN);
  };
  // Start with every per-vowel feature missing; successful stages overwrite.
  set_missing({"J_loc", "J_ppq3", "J_ppq5", "J_ppq55", "S_loc", "S_apq3", "S_apq5", "S_apq11",
               "S_apq55", "DPF", "HNR", "GNE_mu", "GNE_sd", "PFR", "PPE", "PVI"});
  for (int p = 1; p <= 8; ++p) {
    f.emplace("H" + std::to_string(p) + "_mu", kNaN);
    f.emplace("H" + std::to_string(p) + "_sd", kNaN);
    f.emplace("RelH" + std::to_string(p), kNaN);
  }
  for (int m = 1; m <= 12; ++m) {
    f.emplace("MFCC" + std::to_string(m), kNaN);
    f.emplace("dMFCC" + std::to_string(m), kNaN);
  }

  VoiceRecording rec;
  try {
    rec = decode_recording(entry);
    const auto trimmed = trim_silence(rec);
    rec = trimmed.rec;
    out.log.trimmed_lead_s = trimmed.lead_seconds;
    out.log.trimmed_tail_s = trimmed.tail_seconds;
    out.log.duration_s = rec.duration();
    if (trimmed.lead_seconds > 0 || trimmed.tail_seconds > 0) {
      log_debug(entry.subject_id + "/" + std::string(1, vowel_char(entry.vowel)) + ": trimmed " +
                std::to_string(trimmed.lead_seconds) + "s lead, " +
                std::to_string(trimmed.tail_seconds) + "s tail");
    }
  } catch (const std::exception& e) {
    note_failure(out, "decode", e);
    return out;
  }

  // Pitch-dependent chain.
  std::optional<F0Contour> contour;
  try {
    contour = track_f0(rec);
    out.log.voiced_fraction = contour->voiced_fraction();
    out.log.mean_f0 = contour->mean_f0;
  } catch (const std::exception& e) {
    note_failure(out, "pitch", e);
  }

  if (contour) {
    try {
      const auto seg = segment_periods(rec, *contour);
      out.log.cycles = static_cast<int>(seg.cycles());
      const auto p = perturbation_features(seg);
      f["J_loc"] = p.j_loc;
      f["J_ppq3"] = p.j_ppq3;
      f["J_ppq5"] = p.j_ppq5;
      f["J_ppq55"] = p.j_ppq55;
      f["S_loc"] = p.s_loc;
      f["S_apq3"] = p.s_apq3;
      f["S_apq5"] = p.s_apq5;
      f["S_apq11"] = p.s_apq11;
      f["S_apq55"] = p.s_apq55;
      f["DPF"] = p.dfp;

      const auto h = harmonic_profile(rec, seg);
      for (int p8 = 1; p8 <= 8; ++p8) {
        f["H" + std::to_string(p8) + "_mu"] = h.h_mu[static_cast<std::size_t>(p8 - 1)];
        f["H" + std::to_string(p8) + "_sd"] = h.h_sd[static_cast<std::size_t>(p8 - 1)];
        f["RelH" + std::to_string(p8)] = h.rel_h[static_cast<std::size_t>(p8 - 1)];
      }
    } catch (const std::exception& e) {
      note_failure(out, "segmentation", e);
    }

    try {
      f["HNR"] = hnr(rec, *contour);
    } catch (const std::exception& e) {
      note_failure(out, "hnr", e);
    }
    try {
      f["PFR"] = pfr(*contour);
    } catch (const std::exception& e) {
      note_failure(out, "pfr", e);
    }
    try {
      f["PPE"] = ppe(*contour);
    } catch (const std::exception& e) {
      note_failure(out, "ppe", e);
    }
    try {
      f["PVI"] = pvi(*contour);
    } catch (const std::exception& e) {
      note_failure(out, "pvi", e);
    }
  }

  try {
    const auto g = gne(rec);
    f["GNE_mu"] = g.mean;
    f["GNE_sd"] = g.sd;
  } catch (const std::exception& e) {
    note_failure(out, "gne", e);
  }

  try {
    const auto frames = mfcc_frames(rec);
    std::array<double, kNumCepstra> avg{};
    for (const auto& fr : frames) {
      for (int c = 0; c < kNumCepstra; ++c) avg[static_cast<std::size_t>(c)] += fr[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < kNumCepstra; ++c) {
      f["MFCC" + std::to_string(c + 1)] = avg[static_cast<std::size_t>(c)] / static_cast<double>(frames.size());
    }
    const auto d = delta_mfcc(frames);
    for (int c = 0; c < kNumCepstra; ++c) {
      f["dMFCC" + std::to_string(c + 1)] = d[static_cast<std::size_t>(c)];
    }
  } catch (const std::exception& e) {
    note_failure(out, "mfcc", e);
  }

  try {
    out.envelope = spectral_envelope(rec);
    out.f2 = second_formant(*out.envelope, entry.vowel);
  } catch (const std::exception& e) {
    note_failure(out, "envelope", e);
  }

  return out;
}

}  // namespace

FeatureTable extract_features(const CorpusManifest& manifest, int threads,
                              std::vector<RecordingLog>* log) {
  const auto& entries = manifest.entries;
  std::vector<VowelResult> results(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    results[i] = process_recording(entries[i]);
  });

  // Merge the two vowels of each subject into one canonical row.
  std::map<std::string, std::pair<const VowelResult*, const VowelResult*>> by_subject;
  std::vector<std::string> subject_order;
  std::map<std::string, int> subject_label;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& slot = by_subject[entries[i].subject_id];
    if (!slot.first && !slot.second) subject_order.push_back(entries[i].subject_id);
    (entries[i].vowel == Vowel::A ? slot.first : slot.second) = &results[i];
    subject_label[entries[i].subject_id] = static_cast<int>(entries[i].label);
  }

  std::vector<FeatureVector> rows;
  for (const auto& sid : subject_order) {
    const auto& [ra, ri] = by_subject[sid];
    if (!ra || !ri) throw InputError("subject '" + sid + "' is missing a vowel recording");

    FeatureVector fv;
    fv.subject_id = sid;
    fv.label = subject_label[sid];
    fv.values.assign(kFeatureCount, kNaN);

    auto put = [&fv](const std::string& name, double value) {
      const int idx = feature_index(name);
      if (idx < 0) throw ComputeError("unknown canonical feature '" + name + "'");
      fv.values[static_cast<std::size_t>(idx)] = value;
    };

    for (const auto& [name, value] : ra->features) put(name + "_a", value);
    for (const auto& [name, value] : ri->features) put(name + "_i", value);
    put("F2_i", ri->f2 ? *ri->f2 : kNaN);
    if (ra->envelope && ri->envelope) {
      put("d1", envelope_distance(*ri->envelope, *ra->envelope));
    }
    if (ra->f2 && ri->f2) {
      put("F2_conv", std::abs(*ri->f2 - *ra->f2));
    }
    rows.push_back(std::move(fv));
  }

  // Missing-feature counts for the log.
  if (log) {
    std::map<std::string, const FeatureVector*> row_of;
    for (const auto& r : rows) row_of[r.subject_id] = &r;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      RecordingLog rl = results[i].log;
      const std::string suffix = std::string("_") + rl.vowel;
      std::string missing;
      int count = 0;
      const auto& names = canonical_feature_names();
      const auto* row = row_of[rl.subject_id];
      for (std::size_t c = 0; c < names.size(); ++c) {
        if (!is_missing(row->values[c])) continue;
        const bool vowel_local = names[c].size() > suffix.size() &&
                                 names[c].compare(names[c].size() - suffix.size(), suffix.size(), suffix) == 0;
        if (vowel_local) {
          ++count;
          if (!missing.empty()) missing += ';';
          missing += names[c];
        }
      }
      rl.missing_features = count;
      rl.missing_names = missing;
      log->push_back(std::move(rl));
    }
  }

  return table_from_rows(rows);
}

void write_extraction_log(const std::string& path, const std::vector<RecordingLog>& log) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write extraction log: " + path);
  out << "subject_id,vowel,duration_s,trimmed_lead_s,trimmed_tail_s,voiced_fraction,mean_f0,"
         "cycles,missing_features,missing_names,status\n";
  for (const auto& r : log) {
    out << r.subject_id << ',' << r.vowel << ',' << format_double(r.duration_s) << ','
        << format_double(r.trimmed_lead_s) << ',' << format_double(r.trimmed_tail_s) << ','
        << format_double(r.voiced_fraction) << ',' << format_double(r.mean_f0) << ',' << r.cycles
        << ',' << r.missing_features << ',' << r.missing_names << ',' << r.status << '\n';
  }
}

}  // namespace vowelmark
