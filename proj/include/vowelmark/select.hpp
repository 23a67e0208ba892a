#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vowelmark/featureset.hpp"

namespace vowelmark {

enum class FsMethod { QoV, Relief, RelieFF, Lasso };

std::string fs_method_name(FsMethod m);
FsMethod parse_fs_method(const std::string& s);

// A full ordering of the canonical features, most relevant first, with the
// per-feature score that produced it. Ties break by canonical order.
struct FeatureRanking {
  FsMethod method = FsMethod::QoV;
  std::vector<int> order;      // feature indices, most -> least relevant
  std::vector<double> scores;  // aligned with canonical feature index
};

// Quality of variation: per feature, the impurity of a class is the fraction
// of opposite-class samples falling inside that class's [min, max] span,
// floored at 1/(2n); QoV is the inverse of the mean class impurity.
FeatureRanking rank_qov(const FeatureTable& table);

// Classic Relief, one nearest hit/miss, deterministic full pass over all
// instances. Distances and weight updates use range-normalized differences.
FeatureRanking rank_relief(const FeatureTable& table);

// RelieFF with k nearest hits/misses and class-prior weighting of misses.
// k is clamped (with a warning) to the smallest class size minus one.
FeatureRanking rank_relieff(const FeatureTable& table, int k = 11);

// LASSO elimination-order ranking over a 100-point logarithmic lambda grid.
FeatureRanking rank_lasso(const FeatureTable& table);

// Coordinate-descent lasso path, objective (1/2n)|y - X b|^2 + lambda |b|_1.
// Grid runs from lambda_max = max|X^T y|/n down by `ratio`, warm-started.
struct LassoPath {
  std::vector<double> lambdas;          // descending
  Eigen::MatrixXd beta;                 // d x n_lambda
  std::vector<std::uint8_t> converged;  // per grid point
};

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n_lambda = 100,
                     double lambda_ratio = 1e-4, int max_sweeps = 10000, double tol = 1e-7);

// Backward-stepwise selection. The evaluator returns CV accuracy (percent)
// for a candidate subset; removal of the least useful feature continues
// while some removal keeps accuracy within 1e-12 of the current value.
struct BssRound {
  int removed_feature = -1;
  double accuracy = 0.0;
};

std::vector<int> backward_stepwise(std::span<const int> subset,
                                   const std::function<double(std::span<const int>)>& evaluator,
                                   std::vector<BssRound>* trace = nullptr);

void write_ranking(const std::string& path, const FeatureRanking& ranking,
                   const std::vector<std::string>& names);

}  // namespace vowelmark
