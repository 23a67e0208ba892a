#include "vowelmark/featureset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "vowelmark/util.hpp"

namespace vowelmark {

namespace {

std::vector<std::string> build_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureCount);
  for (const char* v : {"a", "i"}) {
    const std::string s = std::string("_") + v;
    for (const char* j : {"J_loc", "J_ppq3", "J_ppq5", "J_ppq55"}) names.push_back(j + s);
    for (const char* sh : {"S_loc", "S_apq3", "S_apq5", "S_apq11", "S_apq55"}) names.push_back(sh + s);
    names.push_back("DPF" + s);
    names.push_back("HNR" + s);
    names.push_back("GNE_mu" + s);
    names.push_back("GNE_sd" + s);
    names.push_back("PFR" + s);
    names.push_back("PPE" + s);
    names.push_back("PVI" + s);
    for (int p = 1; p <= 8; ++p) names.push_back("H" + std::to_string(p) + "_mu" + s);
    for (int p = 1; p <= 8; ++p) names.push_back("H" + std::to_string(p) + "_sd" + s);
    for (int p = 1; p <= 8; ++p) names.push_back("RelH" + std::to_string(p) + s);
    for (int m = 1; m <= 12; ++m) names.push_back("MFCC" + std::to_string(m) + s);
    for (int m = 1; m <= 12; ++m) names.push_back("dMFCC" + std::to_string(m) + s);
  }
  names.push_back("F2_i");
  names.push_back("d1");
  names.push_back("F2_conv");
  return names;
}

}  // namespace

const std::vector<std::string>& canonical_feature_names() {
  static const std::vector<std::string> names = build_names();
  return names;
}

int feature_index(const std::string& name) {
  static const std::map<std::string, int> index = [] {
    std::map<std::string, int> m;
    const auto& names = canonical_feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = static_cast<int>(i);
    return m;
  }();
  auto it = index.find(name);
  return it == index.end() ? -1 : it->second;
}

FeatureTable table_from_rows(std::span<const FeatureVector> rows) {
  FeatureTable t;
  t.names = canonical_feature_names();
  t.values.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].values.size() != kFeatureCount) {
      throw InputError("feature vector for subject '" + rows[r].subject_id + "' has " +
                       std::to_string(rows[r].values.size()) + " values, expected " +
                       std::to_string(kFeatureCount));
    }
    t.subjects.push_back(rows[r].subject_id);
    t.labels.push_back(rows[r].label);
    for (int c = 0; c < kFeatureCount; ++c) {
      t.values(static_cast<Eigen::Index>(r), c) = rows[r].values[static_cast<std::size_t>(c)];
    }
  }
  return t;
}

Standardization fit_standardization(const FeatureTable& table, std::span<const int> train_rows) {
  if (train_rows.empty()) throw InputError("fit_standardization: no training rows");
  const int d = table.cols();
  Standardization st;
  st.mean.resize(d);
  st.sd.resize(d);
  st.sd_passthrough.assign(static_cast<std::size_t>(d), 0);

  for (int c = 0; c < d; ++c) {
    double sum = 0.0;
    int n = 0;
    for (int r : train_rows) {
      const double v = table.values(r, c);
      if (!is_missing(v)) {
        sum += v;
        ++n;
      }
    }
    // A feature missing on every training row imputes to zero.
    const double mean = n ? sum / n : 0.0;
    double var = 0.0;
    for (int r : train_rows) {
      const double v = table.values(r, c);
      const double x = is_missing(v) ? mean : v;
      var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(train_rows.size());
    const double sd = std::sqrt(var);
    st.mean(c) = mean;
    if (sd < 1e-12) {
      st.sd(c) = 1.0;  // centered passthrough
      st.sd_passthrough[static_cast<std::size_t>(c)] = 1;
    } else {
      st.sd(c) = sd;
    }
  }
  return st;
}

Eigen::MatrixXd apply_standardization(const FeatureTable& table, const Standardization& st,
                                      std::span<const int> rows, std::span<const int> columns) {
  std::vector<int> all_cols;
  if (columns.empty()) {
    all_cols.resize(static_cast<std::size_t>(table.cols()));
    for (int c = 0; c < table.cols(); ++c) all_cols[static_cast<std::size_t>(c)] = c;
    columns = all_cols;
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const int c = columns[j];
      double v = table.values(rows[i], c);
      if (is_missing(v)) v = st.mean(c);  // training-mean imputation
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (v - st.mean(c)) / st.sd(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Regularized incomplete beta function by continued fraction.
double betacf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 1e-14, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double pearson_p_value(double r, int n) {
  if (n <= 2) return 1.0;
  const double df = static_cast<double>(n - 2);
  const double r2 = std::min(r * r, 1.0 - 1e-15);
  const double t2 = r2 * df / (1.0 - r2);
  // Two-sided: P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
  return inc_beta(df / 2.0, 0.5, df / (df + t2));
}

std::vector<SurveyRow> correlation_survey(const FeatureTable& table) {
  const int n_rows = table.rows();
  if (n_rows < 3) throw InputError("correlation_survey: needs >= 3 rows");
  bool has0 = false, has1 = false;
  for (int l : table.labels) (l ? has1 : has0) = true;
  if (!has0 || !has1) throw InputError("correlation_survey: both classes must be present");

  std::vector<SurveyRow> rows;
  for (int c = 0; c < table.cols(); ++c) {
    SurveyRow row;
    row.feature = table.names[static_cast<std::size_t>(c)];
    row.index = c;

    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    int n = 0;
    for (int r = 0; r < n_rows; ++r) {
      const double x = table.values(r, c);
      if (is_missing(x)) continue;
      const double y = static_cast<double>(table.labels[static_cast<std::size_t>(r)]);
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
      ++n;
    }
    if (n >= 3) {
      const double cov = sxy - sx * sy / n;
      const double vx = sxx - sx * sx / n;
      const double vy = syy - sy * sy / n;
      if (vx > 1e-24 && vy > 1e-24) {
        row.r = cov / std::sqrt(vx * vy);
        row.p = pearson_p_value(row.r, n);
      } else {
        row.zero_variance = true;
      }
    } else {
      row.zero_variance = true;
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SurveyRow& a, const SurveyRow& b) {
    return std::abs(a.r) > std::abs(b.r);
  });
  return rows;
}

// ---------------------------------------------------------------------------

DensityExport density_export(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw InputError("density_export: size mismatch");

  std::vector<double> cls[2];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (is_missing(values[i])) continue;
    cls[labels[i] ? 1 : 0].push_back(values[i]);
  }
  for (int c = 0; c < 2; ++c) {
    if (cls[c].size() < 5) {
      throw ComputeError("density_export: class " + std::to_string(c) + " has fewer than 5 samples");
    }
  }

  auto silverman = [](std::vector<double>& x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    const double sd = std::sqrt(var);
    const double q1 = x[static_cast<std::size_t>(0.25 * (n - 1))];
    const double q3 = x[static_cast<std::size_t>(0.75 * (n - 1))];
    const double iqr = q3 - q1;
    double spread = sd;
    if (iqr > 0) spread = std::min(sd, iqr / 1.34);
    if (spread <= 0) throw ComputeError("density_export: degenerate class (zero spread)");
    return 0.9 * spread * std::pow(n, -0.2);
  };

  DensityExport out;
  out.bandwidth_hc = silverman(cls[0]);
  out.bandwidth_als = silverman(cls[1]);

  const double bw_max = std::max(out.bandwidth_hc, out.bandwidth_als);
  const double lo = std::min(cls[0].front(), cls[1].front()) - 3.0 * bw_max;
  const double hi = std::max(cls[0].back(), cls[1].back()) + 3.0 * bw_max;

  const int points = 200;
  out.x.resize(points);
  out.pdf_hc.resize(points);
  out.pdf_als.resize(points);
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
  for (int k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / (points - 1);
    out.x[static_cast<std::size_t>(k)] = x;
    for (int c = 0; c < 2; ++c) {
      const double bw = c ? out.bandwidth_als : out.bandwidth_hc;
      double acc = 0.0;
      for (double v : cls[c]) {
        const double u = (x - v) / bw;
        acc += std::exp(-0.5 * u * u);
      }
      acc *= inv_sqrt2pi / (bw * static_cast<double>(cls[c].size()));
      (c ? out.pdf_als : out.pdf_hc)[static_cast<std::size_t>(k)] = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_feature_table(const std::string& path, const FeatureTable& table) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write feature table: " + path);
  out << "subject_id,label";
  for (const auto& n : table.names) out << ',' << n;
  out << '\n';
  for (int r = 0; r < table.rows(); ++r) {
    out << table.subjects[static_cast<std::size_t>(r)] << ','
        << table.labels[static_cast<std::size_t>(r)];
    for (int c = 0; c < table.cols(); ++c) out << ',' << format_double(table.values(r, c));
    out << '\n';
  }
}

FeatureTable read_feature_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open feature table: " + path);

  std::string line;
  if (!std::getline(in, line)) throw InputError("feature table is empty: " + path);
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "subject_id" || header[1] != "label") {
    throw InputError("feature table header must start with subject_id,label: " + path);
  }

  FeatureTable t;
  t.names.assign(header.begin() + 2, header.end());
  const auto& canon = canonical_feature_names();
  if (t.names != canon) {
    throw InputError("feature table columns do not match the canonical feature list: " + path);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim_ws(line).empty()) continue;
    auto cols = split_csv_line(line);
    if (cols.size() != header.size()) {
      throw InputError("feature table row has " + std::to_string(cols.size()) + " columns: " + path);
    }
    t.subjects.push_back(cols[0]);
    const std::string lbl = trim_ws(cols[1]);
    if (lbl != "0" && lbl != "1") throw InputError("feature table label must be 0/1: " + path);
    t.labels.push_back(lbl == "1" ? 1 : 0);
    std::vector<double> vals;
    vals.reserve(t.names.size());
    for (std::size_t c = 2; c < cols.size(); ++c) vals.push_back(parse_double(cols[c]));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw InputError("feature table has no rows: " + path);

  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < t.names.size(); ++c) {
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return t;
}

}  // namespace vowelmark
