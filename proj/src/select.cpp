#include "vowelmark/select.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "vowelmark/util.hpp"

namespace vowelmark {

std::string fs_method_name(FsMethod m) {
  switch (m) {
    case FsMethod::QoV: return "qov";
    case FsMethod::Relief: return "relief";
    case FsMethod::RelieFF: return "relieff";
    case FsMethod::Lasso: return "lasso";
  }
  return "?";
}

FsMethod parse_fs_method(const std::string& s) {
  if (s == "qov") return FsMethod::QoV;
  if (s == "relief") return FsMethod::Relief;
  if (s == "relieff") return FsMethod::RelieFF;
  if (s == "lasso") return FsMethod::Lasso;
  throw InputError("unknown feature-selection method '" + s + "' (qov|relief|relieff|lasso)");
}

namespace {

// Descending score with canonical (index) tie-break.
std::vector<int> order_by_score(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  return order;
}

std::vector<int> all_rows(const FeatureTable& t) {
  std::vector<int> rows(static_cast<std::size_t>(t.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------

FeatureRanking rank_qov(const FeatureTable& table) {
  const int n = table.rows();
  bool has0 = false, has1 = false;
  for (int l : table.labels) (l ? has1 : has0) = true;
  if (!has0 || !has1) throw InputError("rank_qov: both classes must be present");

  const double floor_impurity = 1.0 / (2.0 * static_cast<double>(n));
  std::vector<double> scores(static_cast<std::size_t>(table.cols()), 0.0);

  for (int c = 0; c < table.cols(); ++c) {
    double lo[2], hi[2];
    bool any[2] = {false, false};
    for (int r = 0; r < n; ++r) {
      const double v = table.values(r, c);
      if (is_missing(v)) continue;
      const int cls = table.labels[static_cast<std::size_t>(r)] ? 1 : 0;
      if (!any[cls]) {
        lo[cls] = hi[cls] = v;
        any[cls] = true;
      } else {
        lo[cls] = std::min(lo[cls], v);
        hi[cls] = std::max(hi[cls], v);
      }
    }
    double impurity_sum = 0.0;
    int impurity_n = 0;
    for (int cls = 0; cls < 2; ++cls) {
      if (!any[cls] || !any[1 - cls]) continue;
      int inside = 0, total = 0;
      for (int r = 0; r < n; ++r) {
        if ((table.labels[static_cast<std::size_t>(r)] ? 1 : 0) != 1 - cls) continue;
        const double v = table.values(r, c);
        if (is_missing(v)) continue;
        ++total;
        if (v >= lo[cls] && v <= hi[cls]) ++inside;
      }
      const double imp = total ? static_cast<double>(inside) / total : 1.0;
      impurity_sum += std::max(imp, floor_impurity);
      ++impurity_n;
    }
    scores[static_cast<std::size_t>(c)] =
        impurity_n ? static_cast<double>(impurity_n) / impurity_sum : 0.0;
  }

  FeatureRanking rk;
  rk.method = FsMethod::QoV;
  rk.scores = std::move(scores);
  rk.order = order_by_score(rk.scores);
  return rk;
}

// ---------------------------------------------------------------------------

namespace {

// Shared Relief machinery: standardized values, range-normalized Manhattan
// metric, deterministic neighbor ordering.
struct ReliefData {
  Eigen::MatrixXd x;
  std::vector<double> inv_range;
  std::vector<int> labels;

  double diff(int f, int r1, int r2) const {
    return std::abs(x(r1, f) - x(r2, f)) * inv_range[static_cast<std::size_t>(f)];
  }

  double distance(int r1, int r2) const {
    double s = 0.0;
    for (int f = 0; f < x.cols(); ++f) s += diff(f, r1, r2);
    return s;
  }
};

ReliefData relief_data(const FeatureTable& table) {
  ReliefData d;
  auto rows = all_rows(table);
  auto st = fit_standardization(table, rows);
  d.x = apply_standardization(table, st, rows);
  d.labels = table.labels;
  d.inv_range.resize(static_cast<std::size_t>(d.x.cols()));
  for (int f = 0; f < d.x.cols(); ++f) {
    const double range = d.x.col(f).maxCoeff() - d.x.col(f).minCoeff();
    d.inv_range[static_cast<std::size_t>(f)] = range > 1e-12 ? 1.0 / range : 0.0;
  }
  return d;
}

// Indices of the k nearest rows to `i` with the given label predicate,
// ordered by (distance, index).
std::vector<int> nearest(const ReliefData& d, int i, bool same_class, int k) {
  std::vector<std::pair<double, int>> cand;
  for (int j = 0; j < d.x.rows(); ++j) {
    if (j == i) continue;
    const bool same = d.labels[static_cast<std::size_t>(j)] == d.labels[static_cast<std::size_t>(i)];
    if (same != same_class) continue;
    cand.emplace_back(d.distance(i, j), j);
  }
  std::sort(cand.begin(), cand.end());
  if (static_cast<int>(cand.size()) > k) cand.resize(static_cast<std::size_t>(k));
  std::vector<int> out;
  for (auto& [dist, j] : cand) out.push_back(j);
  return out;
}

FeatureRanking relief_core(const FeatureTable& table, int k, FsMethod method) {
  ReliefData d = relief_data(table);
  const int n = static_cast<int>(d.x.rows());
  const int nf = static_cast<int>(d.x.cols());

  int class_size[2] = {0, 0};
  for (int l : d.labels) class_size[l ? 1 : 0]++;
  const int min_class = std::min(class_size[0], class_size[1]);
  if (min_class < 1) throw InputError("relief: both classes must be present");

  if (k > min_class - 1) {
    if (min_class - 1 < 1) {
      log_warn("relief: a class has a single member; its instances are skipped as hit sources");
    } else {
      log_warn("relief: k clamped from " + std::to_string(k) + " to " + std::to_string(min_class - 1));
    }
    k = std::max(1, min_class - 1);
  }

  std::vector<double> w(static_cast<std::size_t>(nf), 0.0);
  int used = 0;
  for (int i = 0; i < n; ++i) {
    auto hits = nearest(d, i, true, k);
    auto misses = nearest(d, i, false, k);
    if (hits.empty() || misses.empty()) continue;  // singleton class: no hit available
    ++used;
    const double kh = static_cast<double>(hits.size());
    const double km = static_cast<double>(misses.size());
    for (int f = 0; f < nf; ++f) {
      double dh = 0.0, dm = 0.0;
      for (int j : hits) dh += d.diff(f, i, j);
      for (int j : misses) dm += d.diff(f, i, j);
      w[static_cast<std::size_t>(f)] += dm / km - dh / kh;
    }
  }
  if (used == 0) throw ComputeError("relief: no instance had both a hit and a miss");
  for (auto& v : w) v /= static_cast<double>(used);

  FeatureRanking rk;
  rk.method = method;
  rk.scores = std::move(w);
  rk.order = order_by_score(rk.scores);
  return rk;
}

}  // namespace

FeatureRanking rank_relief(const FeatureTable& table) {
  return relief_core(table, 1, FsMethod::Relief);
}

FeatureRanking rank_relieff(const FeatureTable& table, int k) {
  if (k < 1) throw InputError("rank_relieff: k must be >= 1");
  return relief_core(table, k, FsMethod::RelieFF);
}

// ---------------------------------------------------------------------------

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int n_lambda,
                     double lambda_ratio, int max_sweeps, double tol) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (y.size() != n) throw InputError("lasso_path: X/y size mismatch");

  const Eigen::VectorXd col_norm2 = x.colwise().squaredNorm() / static_cast<double>(n);
  const double lambda_max = (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(n);

  LassoPath path;
  path.lambdas.resize(static_cast<std::size_t>(n_lambda));
  path.beta = Eigen::MatrixXd::Zero(d, n_lambda);
  path.converged.assign(static_cast<std::size_t>(n_lambda), 1);

  if (lambda_max <= 0.0) {
    // Response orthogonal to every column; the whole path is zero.
    for (int l = 0; l < n_lambda; ++l) {
      path.lambdas[static_cast<std::size_t>(l)] = 0.0;
    }
    return path;
  }

  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * lambda_ratio);
  for (int l = 0; l < n_lambda; ++l) {
    const double t = (n_lambda == 1) ? 0.0 : static_cast<double>(l) / (n_lambda - 1);
    path.lambdas[static_cast<std::size_t>(l)] = std::exp(log_max + t * (log_min - log_max));
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd resid = y;

  for (int l = 0; l < n_lambda; ++l) {
    const double lambda = path.lambdas[static_cast<std::size_t>(l)];
    bool ok = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double max_delta = 0.0;
      for (int j = 0; j < d; ++j) {
        if (col_norm2(j) <= 1e-300) continue;
        const double bj = beta(j);
        const double rho = x.col(j).dot(resid) / static_cast<double>(n) + col_norm2(j) * bj;
        double bnew = 0.0;
        if (rho > lambda) bnew = (rho - lambda) / col_norm2(j);
        else if (rho < -lambda) bnew = (rho + lambda) / col_norm2(j);
        if (bnew != bj) {
          resid += x.col(j) * (bj - bnew);
          beta(j) = bnew;
          max_delta = std::max(max_delta, std::abs(bnew - bj));
        }
      }
      if (max_delta < tol) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      path.converged[static_cast<std::size_t>(l)] = 0;
      log_warn("lasso_path: no convergence at lambda index " + std::to_string(l) + ", grid point skipped");
    }
    path.beta.col(l) = beta;
  }
  return path;
}

FeatureRanking rank_lasso(const FeatureTable& table) {
  auto rows = all_rows(table);
  auto st = fit_standardization(table, rows);
  Eigen::MatrixXd x = apply_standardization(table, st, rows);
  Eigen::VectorXd y(table.rows());
  for (int r = 0; r < table.rows(); ++r) y(r) = static_cast<double>(table.labels[static_cast<std::size_t>(r)]);
  y.array() -= y.mean();

  const int d = static_cast<int>(x.cols());

  // Exact-duplicate columns share one path slot; the whole group inherits its
  // elimination position so duplicates rank contiguously.
  std::vector<int> group(static_cast<std::size_t>(d), -1);
  std::vector<int> reps;
  for (int j = 0; j < d; ++j) {
    for (int r : reps) {
      if (x.col(j) == x.col(r)) {
        group[static_cast<std::size_t>(j)] = group[static_cast<std::size_t>(r)];
        break;
      }
    }
    if (group[static_cast<std::size_t>(j)] < 0) {
      group[static_cast<std::size_t>(j)] = static_cast<int>(reps.size());
      reps.push_back(j);
    }
  }

  Eigen::MatrixXd xu(x.rows(), static_cast<Eigen::Index>(reps.size()));
  for (std::size_t i = 0; i < reps.size(); ++i) xu.col(static_cast<Eigen::Index>(i)) = x.col(reps[i]);

  const auto path = lasso_path(xu, y);
  const int n_lambda = static_cast<int>(path.lambdas.size());

  // Grid index of the strongest penalty at which each (unique) feature is
  // still active; lower index = survives a stronger penalty = more relevant.
  std::vector<int> first_active(reps.size(), n_lambda);
  for (std::size_t u = 0; u < reps.size(); ++u) {
    for (int l = 0; l < n_lambda; ++l) {
      if (!path.converged[static_cast<std::size_t>(l)]) continue;
      if (path.beta(static_cast<Eigen::Index>(u), l) != 0.0) {
        first_active[u] = l;
        break;
      }
    }
  }

  FeatureRanking rk;
  rk.method = FsMethod::Lasso;
  rk.scores.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const int fa = first_active[static_cast<std::size_t>(group[static_cast<std::size_t>(j)])];
    rk.scores[static_cast<std::size_t>(j)] =
        (fa >= n_lambda) ? 0.0 : path.lambdas[static_cast<std::size_t>(fa)];
  }
  rk.order = order_by_score(rk.scores);
  return rk;
}

// ---------------------------------------------------------------------------

std::vector<int> backward_stepwise(std::span<const int> subset,
                                   const std::function<double(std::span<const int>)>& evaluator,
                                   std::vector<BssRound>* trace) {
  if (subset.empty()) throw InputError("backward_stepwise: empty subset");
  std::vector<int> current(subset.begin(), subset.end());
  double cur_acc = evaluator(current);
  if (trace) trace->push_back({-1, cur_acc});

  while (current.size() > 1) {
    double best_acc = -std::numeric_limits<double>::infinity();
    std::size_t best_pos = 0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      std::vector<int> cand;
      cand.reserve(current.size() - 1);
      for (std::size_t j = 0; j < current.size(); ++j) {
        if (j != i) cand.push_back(current[j]);
      }
      const double acc = evaluator(cand);
      if (acc > best_acc) {
        best_acc = acc;
        best_pos = i;
      }
    }
    if (best_acc >= cur_acc - 1e-12) {
      const int removed = current[best_pos];
      current.erase(current.begin() + static_cast<long>(best_pos));
      cur_acc = best_acc;
      if (trace) trace->push_back({removed, cur_acc});
    } else {
      break;
    }
  }
  return current;
}

void write_ranking(const std::string& path, const FeatureRanking& ranking,
                   const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write ranking: " + path);
  out << "rank,feature,score\n";
  for (std::size_t i = 0; i < ranking.order.size(); ++i) {
    const int f = ranking.order[i];
    out << (i + 1) << ',' << names[static_cast<std::size_t>(f)] << ','
        << format_double(ranking.scores[static_cast<std::size_t>(f)]) << '\n';
  }
}

}  // namespace vowelmark
