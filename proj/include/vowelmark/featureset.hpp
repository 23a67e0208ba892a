#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vowelmark/types.hpp"

namespace vowelmark {

inline constexpr int kFeatureCount = 131;

inline bool is_missing(double v) { return std::isnan(v); }

// The canonical ordered feature-name list (constant, versioned by
// kFeatureNamesVersion). Per vowel: jitter (4), shimmer (5), DPF, HNR,
// GNE mean/SD, PFR, PPE, PVI, harmonic means/SDs/RelH (24), MFCC (12),
// dMFCC (12) = 64 names; then F2_i and the joint d1, F2_conv.
inline constexpr int kFeatureNamesVersion = 1;
const std::vector<std::string>& canonical_feature_names();
int feature_index(const std::string& name);  // -1 when unknown

struct FeatureVector {
  std::string subject_id;
  int label = 0;
  std::vector<double> values;  // kFeatureCount entries, NaN = missing
};

struct FeatureTable {
  std::vector<std::string> names;     // canonical
  std::vector<std::string> subjects;  // one per row
  std::vector<int> labels;
  Eigen::MatrixXd values;             // rows x kFeatureCount, NaN = missing

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

FeatureTable table_from_rows(std::span<const FeatureVector> rows);

// Per-feature z-scoring parameters fitted on a designated training subset.
// Missing values are imputed with the training mean before scaling.
// Constant features pass through centered (sd_passthrough set).
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::vector<std::uint8_t> sd_passthrough;
};

Standardization fit_standardization(const FeatureTable& table, std::span<const int> train_rows);

// Applies stored parameters to the selected rows/columns. `columns` empty
// means all features.
Eigen::MatrixXd apply_standardization(const FeatureTable& table, const Standardization& st,
                                      std::span<const int> rows,
                                      std::span<const int> columns = {});

struct SurveyRow {
  std::string feature;
  int index = 0;
  double r = 0.0;
  double p = 1.0;
  bool zero_variance = false;
};

// Pearson correlation of each feature against the labels, two-sided p via
// the exact t transform, ranked by |r| descending. Missing entries are
// ignored pairwise; zero-variance features report r = 0 with a flag.
std::vector<SurveyRow> correlation_survey(const FeatureTable& table);

// Two-sided p-value for a Pearson r at sample size n (t transform).
double pearson_p_value(double r, int n);

struct DensityExport {
  std::vector<double> x;       // 200 shared grid points
  std::vector<double> pdf_hc;  // class 0
  std::vector<double> pdf_als; // class 1
  double bandwidth_hc = 0.0;
  double bandwidth_als = 0.0;
};

// Gaussian KDE per class (Silverman's rule-of-thumb bandwidth), sampled on a
// 200-point grid spanning the pooled data range widened by 3 bandwidths.
// Throws ComputeError when a class has < 5 samples or zero spread.
DensityExport density_export(std::span<const double> values, std::span<const int> labels);

// Feature-table file I/O (CSV; header subject_id,label,<names...>).
void write_feature_table(const std::string& path, const FeatureTable& table);
FeatureTable read_feature_table(const std::string& path);

}  // namespace vowelmark
