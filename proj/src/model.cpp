#include "vowelmark/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "vowelmark/util.hpp"

namespace vowelmark {

using nlohmann::json;

namespace {

// (S_W + gamma I) w = mu_diff with the ridge engaged only for singular or
// badly conditioned scatter. rank_bound = n - 2 caps rank(S_W), so the
// eigenvalue check is skipped when singularity is structural.
Eigen::VectorXd lda_solve(const Eigen::MatrixXd& sw, const Eigen::VectorXd& mu_diff,
                          int rank_bound, double* gamma_used) {
  const int d = static_cast<int>(sw.rows());
  double gamma = 0.0;
  bool bad = rank_bound < d;
  if (!bad) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sw, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    bad = (lmin <= 0.0) || (lmax / std::max(lmin, 1e-300) > 1e8);
  }
  if (bad) {
    const double tr = sw.trace();
    gamma = (tr > 0.0) ? 1e-3 * tr / static_cast<double>(d) : 1e-3;
  }
  if (gamma_used) *gamma_used = gamma;

  Eigen::MatrixXd reg = sw;
  reg.diagonal().array() += gamma;
  Eigen::VectorXd w = reg.ldlt().solve(mu_diff);

  const double norm = w.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ComputeError("lda_direction: zero direction");
  w /= norm;
  if (w.dot(mu_diff) < 0.0) w = -w;  // ALS projects positive
  return w;
}

}  // namespace

Eigen::VectorXd lda_direction(const Eigen::MatrixXd& x, std::span<const int> labels,
                              double* gamma_used) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (static_cast<int>(labels.size()) != n) throw InputError("lda_direction: labels/rows mismatch");

  int n0 = 0, n1 = 0;
  for (int l : labels) (l ? n1 : n0)++;
  if (n0 == 0 || n1 == 0) throw ComputeError("lda_direction: degenerate class counts");

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d), mu1 = Eigen::VectorXd::Zero(d);
  for (int r = 0; r < n; ++r) (labels[static_cast<std::size_t>(r)] ? mu1 : mu0) += x.row(r).transpose();
  mu0 /= static_cast<double>(n0);
  mu1 /= static_cast<double>(n1);

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (int r = 0; r < n; ++r) {
    const Eigen::VectorXd dev = x.row(r).transpose() - (labels[static_cast<std::size_t>(r)] ? mu1 : mu0);
    sw.noalias() += dev * dev.transpose();
  }

  return lda_solve(sw, mu1 - mu0, n - 2, gamma_used);
}

double select_bias(std::span<const double> projections, std::span<const int> labels) {
  const std::size_t n = projections.size();
  if (n == 0 || labels.size() != n) throw InputError("select_bias: bad inputs");

  std::vector<double> sorted(projections.begin(), projections.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> candidates;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (sorted[i] < sorted[i + 1]) candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  }
  if (candidates.empty()) candidates.push_back(sorted[0]);  // all projections equal

  std::int64_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l ? n_pos : n_neg)++;

  double best_t = candidates.front();
  double best_gap = std::numeric_limits<double>::infinity();
  double best_acc = -1.0;
  for (double t : candidates) {
    std::int64_t tp = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pred = projections[i] > t;
      if (labels[i] && pred) ++tp;
      if (!labels[i] && !pred) ++tn;
    }
    const double sens = n_pos ? static_cast<double>(tp) / n_pos : 1.0;
    const double spec = n_neg ? static_cast<double>(tn) / n_neg : 1.0;
    const double gap = std::abs(sens - spec);
    const double acc = static_cast<double>(tp + tn) / static_cast<double>(n);
    if (gap < best_gap - 1e-15 ||
        (std::abs(gap - best_gap) <= 1e-15 && (acc > best_acc + 1e-15 ||
                                               (std::abs(acc - best_acc) <= 1e-15 && t < best_t)))) {
      best_gap = gap;
      best_acc = acc;
      best_t = t;
    }
  }
  return -best_t;
}

Prediction predict_standardized(const LdaModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.w.size()) throw InputError("predict: dimension mismatch");
  Prediction p;
  p.score = model.w.dot(z) + model.b;
  p.label = p.score > 0.0 ? 1 : 0;
  return p;
}

Prediction predict(const LdaModel& model, std::span<const double> raw_row) {
  if (static_cast<Eigen::Index>(raw_row.size()) != model.w.size()) {
    throw InputError("predict: row has " + std::to_string(raw_row.size()) + " values, model has " +
                     std::to_string(model.w.size()));
  }
  Eigen::VectorXd z(model.w.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double v = raw_row[static_cast<std::size_t>(i)];
    if (is_missing(v)) v = model.standardization.mean(i);
    z(i) = (v - model.standardization.mean(i)) / model.standardization.sd(i);
  }
  return predict_standardized(model, z);
}

MetricValues metrics(const Confusion& c) {
  if (c.total() <= 0) throw InputError("metrics: empty confusion");
  MetricValues m;
  m.acc = 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fn > 0) {
    m.sens = 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    m.sens_defined = false;
  }
  if (c.tn + c.fp > 0) {
    m.spec = 100.0 * static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  } else {
    m.spec_defined = false;
  }
  return m;
}

// ---------------------------------------------------------------------------

std::vector<int> stratified_folds(std::span<const int> labels, int k, Rng& rng) {
  const int n = static_cast<int>(labels.size());
  if (k < 2 || k > n) throw InputError("stratified_folds: need 2 <= k <= n");

  std::vector<int> cls0, cls1;
  for (int i = 0; i < n; ++i) (labels[static_cast<std::size_t>(i)] ? cls1 : cls0).push_back(i);
  rng.shuffle(cls0);
  rng.shuffle(cls1);

  // Deal each class round-robin with a running fold pointer so per-class and
  // total fold sizes both stay within one of each other.
  std::vector<int> fold(static_cast<std::size_t>(n), 0);
  int fp = 0;
  for (const auto* cls : {&cls0, &cls1}) {
    for (int idx : *cls) {
      fold[static_cast<std::size_t>(idx)] = fp % k;
      ++fp;
    }
  }
  return fold;
}

namespace {

Confusion evaluate_fold_split(const FeatureTable& table, std::span<const int> subset,
                              const std::vector<int>& train_rows, const std::vector<int>& test_rows,
                              int rep, int fold_id, const CvHooks* hooks) {
  auto st = fit_standardization(table, train_rows);
  if (hooks && hooks->on_fold_standardization) hooks->on_fold_standardization(rep, fold_id, st);

  Eigen::MatrixXd xtr = apply_standardization(table, st, train_rows, subset);
  std::vector<int> ytr;
  ytr.reserve(train_rows.size());
  for (int r : train_rows) ytr.push_back(table.labels[static_cast<std::size_t>(r)]);

  Eigen::VectorXd w = lda_direction(xtr, ytr);
  std::vector<double> proj(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i) proj[i] = xtr.row(static_cast<Eigen::Index>(i)).dot(w);
  const double b = select_bias(proj, ytr);

  Eigen::MatrixXd xte = apply_standardization(table, st, test_rows, subset);
  Confusion conf;
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    const double score = xte.row(static_cast<Eigen::Index>(i)).dot(w) + b;
    const int pred = score > 0.0 ? 1 : 0;
    const int truth = table.labels[static_cast<std::size_t>(test_rows[i])];
    if (truth == 1 && pred == 1) ++conf.tp;
    else if (truth == 0 && pred == 0) ++conf.tn;
    else if (truth == 0 && pred == 1) ++conf.fp;
    else ++conf.fn;
  }
  return conf;
}

void aggregate(EvalReport& report) {
  std::vector<double> acc, sens, spec;
  for (const auto& c : report.repetitions) {
    const auto m = metrics(c);
    acc.push_back(m.acc);
    if (m.sens_defined) sens.push_back(m.sens);
    if (m.spec_defined) spec.push_back(m.spec);
  }
  auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
    if (v.empty()) {
      mean = sd = 0.0;
      return;
    }
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
  };
  mean_sd(acc, report.acc_mean, report.acc_sd);
  mean_sd(sens, report.sens_mean, report.sens_sd);
  mean_sd(spec, report.spec_mean, report.spec_sd);
}

std::vector<int> resolve_subset(const FeatureTable& table, std::span<const int> subset) {
  std::vector<int> cols(subset.begin(), subset.end());
  if (cols.empty()) {
    cols.resize(static_cast<std::size_t>(table.cols()));
    std::iota(cols.begin(), cols.end(), 0);
  }
  for (int c : cols) {
    if (c < 0 || c >= table.cols()) throw InputError("feature subset index out of range");
  }
  return cols;
}

}  // namespace

EvalReport stratified_kfold_cv(const FeatureTable& table, std::span<const int> subset, int k,
                               int repetitions, std::uint64_t seed, int threads,
                               const CvHooks* hooks) {
  if (repetitions < 1) throw InputError("cv: repetitions must be >= 1");
  const auto cols = resolve_subset(table, subset);
  const int n = table.rows();

  EvalReport report;
  report.repetitions.resize(static_cast<std::size_t>(repetitions));

  parallel_for(static_cast<std::size_t>(repetitions), threads, [&](std::size_t rep) {
    Rng rng = Rng::sub(seed, rep);
    const auto fold = stratified_folds(table.labels, k, rng);

    // Every fold must carry both classes.
    std::vector<int> has0(static_cast<std::size_t>(k), 0), has1(static_cast<std::size_t>(k), 0);
    for (int r = 0; r < n; ++r) {
      (table.labels[static_cast<std::size_t>(r)] ? has1 : has0)[static_cast<std::size_t>(fold[static_cast<std::size_t>(r)])] = 1;
    }
    for (int f = 0; f < k; ++f) {
      if (!has0[static_cast<std::size_t>(f)] || !has1[static_cast<std::size_t>(f)]) {
        throw ComputeError("stratification infeasible: fold " + std::to_string(f) +
                           " lacks a class (k too large for the class sizes)");
      }
    }

    Confusion pooled;
    for (int f = 0; f < k; ++f) {
      std::vector<int> train, test;
      for (int r = 0; r < n; ++r) {
        (fold[static_cast<std::size_t>(r)] == f ? test : train).push_back(r);
      }
      const Confusion c = evaluate_fold_split(table, cols, train, test, static_cast<int>(rep), f, hooks);
      pooled.tp += c.tp;
      pooled.tn += c.tn;
      pooled.fp += c.fp;
      pooled.fn += c.fn;
    }
    report.repetitions[rep] = pooled;
  });

  aggregate(report);
  return report;
}

EvalReport loso_cv(const FeatureTable& table, std::span<const int> subset) {
  const auto cols = resolve_subset(table, subset);
  const int n = table.rows();
  if (n < 3) throw InputError("loso_cv: needs at least 3 subjects");

  Confusion pooled;
  for (int held = 0; held < n; ++held) {
    std::vector<int> train, test{held};
    for (int r = 0; r < n; ++r) {
      if (r != held) train.push_back(r);
    }

    int n0 = 0, n1 = 0;
    for (int r : train) (table.labels[static_cast<std::size_t>(r)] ? n1 : n0)++;

    Confusion c;
    if (n0 == 0 || n1 == 0) {
      // Single-class training fold (tiny datasets): majority-class fallback
      // keeps the report well-formed.
      const int pred = n1 > 0 ? 1 : 0;
      const int truth = table.labels[static_cast<std::size_t>(held)];
      if (truth == 1 && pred == 1) ++c.tp;
      else if (truth == 0 && pred == 0) ++c.tn;
      else if (truth == 0 && pred == 1) ++c.fp;
      else ++c.fn;
    } else {
      c = evaluate_fold_split(table, cols, train, test, 0, held, nullptr);
    }
    pooled.tp += c.tp;
    pooled.tn += c.tn;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
  }

  EvalReport report;
  report.repetitions.push_back(pooled);
  aggregate(report);
  return report;
}

// ---------------------------------------------------------------------------

CvCache::CvCache(const FeatureTable& table, int k, int repetitions, std::uint64_t seed) : k_(k) {
  if (repetitions < 1) throw InputError("CvCache: repetitions must be >= 1");
  const int n = table.rows();
  reps_.resize(static_cast<std::size_t>(repetitions));

  for (int rep = 0; rep < repetitions; ++rep) {
    Rng rng = Rng::sub(seed, static_cast<std::uint64_t>(rep));
    const auto fold = stratified_folds(table.labels, k, rng);
    auto& folds = reps_[static_cast<std::size_t>(rep)];
    folds.resize(static_cast<std::size_t>(k));

    for (int f = 0; f < k; ++f) {
      std::vector<int> train, test;
      for (int r = 0; r < n; ++r) (fold[static_cast<std::size_t>(r)] == f ? test : train).push_back(r);
      if (train.empty() || test.empty()) throw ComputeError("CvCache: empty fold");

      Fold& fo = folds[static_cast<std::size_t>(f)];
      const auto st = fit_standardization(table, train);
      fo.xtr = apply_standardization(table, st, train);
      fo.xte = apply_standardization(table, st, test);
      for (int r : train) fo.ytr.push_back(table.labels[static_cast<std::size_t>(r)]);
      for (int r : test) fo.yte.push_back(table.labels[static_cast<std::size_t>(r)]);

      const int d = static_cast<int>(fo.xtr.cols());
      int n0 = 0, n1 = 0;
      for (int l : fo.ytr) (l ? n1 : n0)++;
      if (n0 == 0 || n1 == 0) throw ComputeError("CvCache: fold without both classes");
      Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d), mu1 = Eigen::VectorXd::Zero(d);
      for (Eigen::Index r = 0; r < fo.xtr.rows(); ++r) {
        (fo.ytr[static_cast<std::size_t>(r)] ? mu1 : mu0) += fo.xtr.row(r).transpose();
      }
      mu0 /= static_cast<double>(n0);
      mu1 /= static_cast<double>(n1);
      fo.mu_diff = mu1 - mu0;
      fo.sw = Eigen::MatrixXd::Zero(d, d);
      for (Eigen::Index r = 0; r < fo.xtr.rows(); ++r) {
        const Eigen::VectorXd dev = fo.xtr.row(r).transpose() -
                                    (fo.ytr[static_cast<std::size_t>(r)] ? mu1 : mu0);
        fo.sw.noalias() += dev * dev.transpose();
      }
    }
  }
}

EvalReport CvCache::evaluate(std::span<const int> subset, int threads) const {
  if (subset.empty()) throw InputError("CvCache::evaluate: empty subset");
  const std::vector<int> cols(subset.begin(), subset.end());
  const int d = static_cast<int>(cols.size());

  EvalReport report;
  report.repetitions.resize(reps_.size());

  parallel_for(reps_.size(), threads, [&](std::size_t rep) {
    Confusion pooled;
    for (const Fold& fo : reps_[rep]) {
      Eigen::MatrixXd sw(d, d);
      Eigen::VectorXd mu_diff(d);
      for (int i = 0; i < d; ++i) {
        mu_diff(i) = fo.mu_diff(cols[static_cast<std::size_t>(i)]);
        for (int j = 0; j < d; ++j) {
          sw(i, j) = fo.sw(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
        }
      }
      const int n_train = static_cast<int>(fo.xtr.rows());
      Eigen::VectorXd w = lda_solve(sw, mu_diff, n_train - 2, nullptr);

      std::vector<double> proj(static_cast<std::size_t>(n_train));
      for (int r = 0; r < n_train; ++r) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += fo.xtr(r, cols[static_cast<std::size_t>(i)]) * w(i);
        proj[static_cast<std::size_t>(r)] = s;
      }
      const double b = select_bias(proj, fo.ytr);

      for (Eigen::Index r = 0; r < fo.xte.rows(); ++r) {
        double s = b;
        for (int i = 0; i < d; ++i) s += fo.xte(r, cols[static_cast<std::size_t>(i)]) * w(i);
        const int pred = s > 0.0 ? 1 : 0;
        const int truth = fo.yte[static_cast<std::size_t>(r)];
        if (truth == 1 && pred == 1) ++pooled.tp;
        else if (truth == 0 && pred == 0) ++pooled.tn;
        else if (truth == 0 && pred == 1) ++pooled.fp;
        else ++pooled.fn;
      }
    }
    report.repetitions[rep] = pooled;
  });

  aggregate(report);
  return report;
}

double CvCache::accuracy(std::span<const int> subset, int threads) const {
  return evaluate(subset, threads).acc_mean;
}

LdaModel train_model(const FeatureTable& table, std::span<const int> subset) {
  const auto cols = resolve_subset(table, subset);
  std::vector<int> rows(static_cast<std::size_t>(table.rows()));
  std::iota(rows.begin(), rows.end(), 0);

  auto st_full = fit_standardization(table, rows);
  Eigen::MatrixXd x = apply_standardization(table, st_full, rows, cols);

  LdaModel model;
  model.w = lda_direction(x, table.labels, &model.gamma);

  std::vector<double> proj(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) proj[i] = x.row(static_cast<Eigen::Index>(i)).dot(model.w);
  model.b = select_bias(proj, table.labels);

  model.feature_indices = cols;
  model.standardization.mean.resize(static_cast<Eigen::Index>(cols.size()));
  model.standardization.sd.resize(static_cast<Eigen::Index>(cols.size()));
  model.standardization.sd_passthrough.resize(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    model.feature_names.push_back(table.names[static_cast<std::size_t>(cols[i])]);
    model.standardization.mean(static_cast<Eigen::Index>(i)) = st_full.mean(cols[i]);
    model.standardization.sd(static_cast<Eigen::Index>(i)) = st_full.sd(cols[i]);
    model.standardization.sd_passthrough[i] = st_full.sd_passthrough[static_cast<std::size_t>(cols[i])];
  }
  return model;
}

// ---------------------------------------------------------------------------

void write_model(const std::string& path, const LdaModel& model) {
  json j;
  j["schema_version"] = 1;
  j["feature_names"] = model.feature_names;
  j["w"] = std::vector<double>(model.w.data(), model.w.data() + model.w.size());
  j["b"] = model.b;
  j["gamma"] = model.gamma;
  j["standardization"]["mean"] = std::vector<double>(
      model.standardization.mean.data(), model.standardization.mean.data() + model.standardization.mean.size());
  j["standardization"]["sd"] = std::vector<double>(
      model.standardization.sd.data(), model.standardization.sd.data() + model.standardization.sd.size());
  j["standardization"]["sd_passthrough"] = model.standardization.sd_passthrough;

  std::ofstream out(path);
  if (!out) throw InputError("cannot write model: " + path);
  out << j.dump(2) << '\n';
}

LdaModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("model file is not valid JSON: " + path + " (" + e.what() + ")");
  }
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1) {
    throw InputError("unsupported model schema: " + path);
  }

  LdaModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto wv = j.at("w").get<std::vector<double>>();
  const auto mean = j.at("standardization").at("mean").get<std::vector<double>>();
  const auto sd = j.at("standardization").at("sd").get<std::vector<double>>();
  if (wv.size() != m.feature_names.size() || mean.size() != wv.size() || sd.size() != wv.size()) {
    throw InputError("model dimensions disagree: " + path);
  }
  m.w = Eigen::Map<const Eigen::VectorXd>(wv.data(), static_cast<Eigen::Index>(wv.size()));
  m.b = j.at("b").get<double>();
  m.gamma = j.value("gamma", 0.0);
  m.standardization.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  m.standardization.sd = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  m.standardization.sd_passthrough =
      j.at("standardization").value("sd_passthrough", std::vector<std::uint8_t>(wv.size(), 0));
  for (const auto& name : m.feature_names) {
    if (feature_index(name) < 0) throw InputError("model references unknown feature '" + name + "'");
  }
  for (Eigen::Index i = 0; i < m.standardization.sd.size(); ++i) {
    if (!(m.standardization.sd(i) > 0)) throw InputError("model has non-positive sd: " + path);
  }
  m.feature_indices.clear();
  for (const auto& name : m.feature_names) m.feature_indices.push_back(feature_index(name));
  return m;
}

void write_report(const std::string& path, const EvalReport& report, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write report: " + path);
  out << "# " << title << '\n';
  out << "repetition,tp,tn,fp,fn,acc,sens,spec\n";
  for (std::size_t i = 0; i < report.repetitions.size(); ++i) {
    const auto& c = report.repetitions[i];
    const auto m = metrics(c);
    out << (i + 1) << ',' << c.tp << ',' << c.tn << ',' << c.fp << ',' << c.fn << ','
        << format_double(m.acc) << ',' << (m.sens_defined ? format_double(m.sens) : "undefined")
        << ',' << (m.spec_defined ? format_double(m.spec) : "undefined") << '\n';
  }
  out << "aggregate"
      << ": acc " << format_double(report.acc_mean) << " +- " << format_double(report.acc_sd)
      << ", sens " << format_double(report.sens_mean) << " +- " << format_double(report.sens_sd)
      << ", spec " << format_double(report.spec_mean) << " +- " << format_double(report.spec_sd)
      << '\n';
}

}  // namespace vowelmark
