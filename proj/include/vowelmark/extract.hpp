#pragma once

#include <string>
#include <vector>

#include "vowelmark/dataset.hpp"
#include "vowelmark/featureset.hpp"

namespace vowelmark {

// Per-recording extraction diagnostics for the extraction log.
struct RecordingLog {
  std::string subject_id;
  char vowel = 'a';
  double trimmed_lead_s = 0.0;
  double trimmed_tail_s = 0.0;
  double duration_s = 0.0;
  double voiced_fraction = 0.0;
  double mean_f0 = 0.0;
  int cycles = 0;
  int missing_features = 0;
  std::string missing_names;  // ';'-separated
  std::string status;         // "ok" or the failure reason
};

// Runs the full per-vowel feature extraction for every subject in the
// manifest and assembles the canonical 131-column table. Per-recording
// failures mark that vowel's features missing and are reported in the log;
// they do not abort the run.
FeatureTable extract_features(const CorpusManifest& manifest, int threads,
                              std::vector<RecordingLog>* log = nullptr);

void write_extraction_log(const std::string& path, const std::vector<RecordingLog>& log);

}  // namespace vowelmark
