#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vowelmark/types.hpp"

namespace vowelmark {

struct ManifestEntry {
  std::string subject_id;
  Vowel vowel = Vowel::A;
  Label label = Label::HC;
  std::string path;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;  // sorted by (subject_id, vowel)
  int n_subjects = 0;
  int n_als = 0;  // subjects with label 1
  int n_hc = 0;
};

// Reads and validates a manifest: CSV with header `subject_id,vowel,label,path`.
// Relative audio paths resolve against the manifest's directory. Enforces the
// pairing invariant (each subject exactly one /a/ and one /i/, same label) and
// that every referenced file exists.
CorpusManifest load_corpus(const std::string& manifest_path);

void write_manifest(const std::string& path, std::span<const ManifestEntry> entries);

// Scans a corpus directory tree and builds manifest entries. Recordings are
// recognized as <subject>_<vowel>.wav (also "-" or "." separators, any case);
// the label comes from the nearest ancestor directory whose name marks the
// class (als/patients -> 1, hc/norm/healthy/control -> 0).
std::vector<ManifestEntry> scan_corpus_layout(const std::string& root_dir);

// Decodes a 16-bit PCM RIFF/WAVE file: channels averaged to mono, samples
// scaled by 1/32768.
VoiceRecording decode_recording(const ManifestEntry& entry);

// Band-limited resampling of a recording (anti-alias filtered on downsample).
VoiceRecording resample(const VoiceRecording& rec, double target_rate);

struct TrimResult {
  VoiceRecording rec;
  double lead_seconds = 0.0;
  double tail_seconds = 0.0;
};

// Removes leading/trailing material whose short-term level stays below
// `threshold_dbfs`, keeping a hangover on both sides of the active span.
TrimResult trim_silence(const VoiceRecording& rec, double threshold_dbfs = -40.0,
                        double hangover_seconds = 0.2);

// Raw WAV helpers (also used by the corpus synthesizer and tests).
struct WavContent {
  std::vector<std::vector<double>> channels;  // scaled to [-1, 1]
  double sample_rate = 0.0;
};
WavContent wav_read(const std::string& path);
void wav_write_pcm16(const std::string& path, std::span<const double> mono, double sample_rate);

}  // namespace vowelmark
