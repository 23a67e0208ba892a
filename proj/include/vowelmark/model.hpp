#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vowelmark/featureset.hpp"
#include "vowelmark/util.hpp"

namespace vowelmark {

// Fisher discriminant: unit-norm projection w (positive side = ALS), bias b,
// plus everything needed to apply it to raw feature rows.
struct LdaModel {
  Eigen::VectorXd w;
  double b = 0.0;
  std::vector<std::string> feature_names;
  std::vector<int> feature_indices;
  Standardization standardization;
  double gamma = 0.0;  // ridge added to S_W, 0 when not needed
};

// Direction from standardized rows. Solves (S_W + gamma I) w = mu1 - mu0 with
// gamma = 1e-3 trace(S_W)/d engaged only when S_W is singular or its
// condition number exceeds 1e8. w is unit length with ALS projecting positive.
Eigen::VectorXd lda_direction(const Eigen::MatrixXd& x, std::span<const int> labels,
                              double* gamma_used = nullptr);

// Equal-error bias on training projections: candidate thresholds halfway
// between adjacent sorted projections; minimize |Sens - Spec|, ties broken by
// higher accuracy, then lower threshold. Returns b (score = <w,x> + b).
double select_bias(std::span<const double> projections, std::span<const int> labels);

struct Prediction {
  int label = 0;
  double score = 0.0;
};

// score = <w, z> + b on a standardized row; label 1 iff score > 0.
Prediction predict_standardized(const LdaModel& model, const Eigen::VectorXd& z);

// Standardizes a raw feature row with the model's stored parameters, then
// predicts. Row length must match the model dimension.
Prediction predict(const LdaModel& model, std::span<const double> raw_row);

struct Confusion {
  std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::int64_t total() const { return tp + tn + fp + fn; }
};

struct MetricValues {
  double acc = 0.0;
  double sens = 0.0;
  double spec = 0.0;
  bool sens_defined = true;
  bool spec_defined = true;
};

// Percentages from confusion counts. Sensitivity is flagged undefined when
// TP+FN = 0 (and specificity when TN+FP = 0).
MetricValues metrics(const Confusion& c);

struct EvalReport {
  std::vector<Confusion> repetitions;
  double acc_mean = 0.0, acc_sd = 0.0;
  double sens_mean = 0.0, sens_sd = 0.0;
  double spec_mean = 0.0, spec_sd = 0.0;
};

// Instrumentation hook for leakage checks: observes each fold's training
// standardization.
struct CvHooks {
  std::function<void(int rep, int fold, const Standardization&)> on_fold_standardization;
};

// Repeated stratified k-fold CV over subject rows. Standardization, LDA
// direction and bias are fitted inside each training fold. Per repetition
// the confusion is pooled over folds; means/SDs are over repetitions.
EvalReport stratified_kfold_cv(const FeatureTable& table, std::span<const int> subset, int k,
                               int repetitions, std::uint64_t seed, int threads = 1,
                               const CvHooks* hooks = nullptr);

// Leave-one-subject-out CV: deterministic single pass, pooled confusion
// reported as one repetition.
EvalReport loso_cv(const FeatureTable& table, std::span<const int> subset);

// Stratified fold assignment (exposed for tests): fold id per row; per-class
// and total fold sizes each differ by at most one.
std::vector<int> stratified_folds(std::span<const int> labels, int k, Rng& rng);

// Full-data model: standardization on all rows, LDA direction, equal-error
// bias.
LdaModel train_model(const FeatureTable& table, std::span<const int> subset);

// Precomputed CV folds for evaluating many feature subsets under the same
// protocol (subset-size sweeps, backward-stepwise selection). Caches each
// fold's training standardization, standardized rows and full within-class
// scatter; evaluating a subset then only gathers a submatrix and solves.
// Results match stratified_kfold_cv with the same seed.
class CvCache {
 public:
  CvCache(const FeatureTable& table, int k, int repetitions, std::uint64_t seed);

  EvalReport evaluate(std::span<const int> subset, int threads = 1) const;
  double accuracy(std::span<const int> subset, int threads = 1) const;

  int k() const { return k_; }
  int repetitions() const { return static_cast<int>(reps_.size()); }

 private:
  struct Fold {
    Eigen::MatrixXd xtr, xte;       // standardized rows, all features
    std::vector<int> ytr, yte;
    Eigen::MatrixXd sw;             // within-class scatter over all features
    Eigen::VectorXd mu_diff;        // mu_ALS - mu_HC
  };
  int k_ = 0;
  std::vector<std::vector<Fold>> reps_;
};

// Model file (JSON, versioned) and evaluation report (text).
void write_model(const std::string& path, const LdaModel& model);
LdaModel read_model(const std::string& path);
void write_report(const std::string& path, const EvalReport& report, const std::string& title);

}  // namespace vowelmark
