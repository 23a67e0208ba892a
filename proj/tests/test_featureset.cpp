#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "vowelmark/featureset.hpp"
#include "vowelmark/util.hpp"

using namespace vowelmark;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeatureTable random_table(int rows, Rng& rng) {
  std::vector<FeatureVector> fvs;
  for (int r = 0; r < rows; ++r) {
    FeatureVector fv;
    fv.subject_id = "s" + std::to_string(r);
    fv.label = r % 2;
    fv.values.resize(kFeatureCount);
    for (auto& v : fv.values) v = rng.next_gauss();
    fvs.push_back(std::move(fv));
  }
  return table_from_rows(fvs);
}
}  // namespace

TEST_SUITE("featureset") {

TEST_CASE("canonical names: 131 unique entries in the documented order") {
  const auto& names = canonical_feature_names();
  REQUIRE(names.size() == kFeatureCount);

  auto sorted = names;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

  CHECK(names[0] == "J_loc_a");
  CHECK(names[63] == "dMFCC12_a");
  CHECK(names[64] == "J_loc_i");
  CHECK(names[128] == "F2_i");
  CHECK(names[129] == "d1");
  CHECK(names[130] == "F2_conv");

  for (const char* expect : {"PVI_a", "PPE_a", "MFCC2_i", "dMFCC6_i", "RelH7_a", "H8_mu_a",
                             "GNE_mu_a", "GNE_sd_i", "S_apq11_i", "J_ppq55_a", "HNR_i", "PFR_a"}) {
    CHECK(feature_index(expect) >= 0);
  }
  CHECK(feature_index("nope") == -1);

  // Stable across calls (constant).
  CHECK(&canonical_feature_names() == &canonical_feature_names());
  CHECK(kFeatureNamesVersion == 1);
}

TEST_CASE("feature table round-trips through CSV exactly, including NaN") {
  Rng rng(3);
  auto table = random_table(7, rng);
  table.values(2, 5) = kNaN;
  table.values(6, 130) = kNaN;

  const auto path = (std::filesystem::temp_directory_path() / "vm_table.csv").string();
  write_feature_table(path, table);
  const auto back = read_feature_table(path);

  REQUIRE(back.rows() == table.rows());
  CHECK(back.subjects == table.subjects);
  CHECK(back.labels == table.labels);
  for (int r = 0; r < table.rows(); ++r) {
    for (int c = 0; c < table.cols(); ++c) {
      if (is_missing(table.values(r, c))) {
        CHECK(is_missing(back.values(r, c)));
      } else {
        CHECK(back.values(r, c) == table.values(r, c));  // bit-exact round trip
      }
    }
  }
}

TEST_CASE("standardization: unit moments, imputation, passthrough for constants") {
  Rng rng(4);
  auto table = random_table(40, rng);
  for (int r = 0; r < 40; ++r) table.values(r, 7) = 3.25;  // constant feature
  table.values(5, 2) = kNaN;
  table.values(9, 2) = kNaN;

  std::vector<int> train;
  for (int r = 0; r < 30; ++r) train.push_back(r);
  const auto st = fit_standardization(table, train);
  const auto z = apply_standardization(table, st, train);

  for (int c = 0; c < table.cols(); ++c) {
    const double mean = z.col(c).mean();
    CHECK(std::abs(mean) <= 1e-12);
    if (!st.sd_passthrough[static_cast<std::size_t>(c)]) {
      const double sd = std::sqrt(z.col(c).squaredNorm() / 30.0);
      CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(st.sd_passthrough[7] == 1);
  CHECK(st.sd(7) == 1.0);

  // Missing entries land exactly on the (standardized) training mean.
  CHECK(z(5, 2) == 0.0);
  CHECK(z(9, 2) == 0.0);

  // Applying the stored parameters to already-standardized data is not a
  // no-op (the guard the table pipeline relies on: raw tables in, z out).
  FeatureTable ztable = table;
  const std::vector<int> all(train.begin(), train.end());
  ztable.values.setZero();
  for (std::size_t i = 0; i < all.size(); ++i) ztable.values.row(all[i]) = z.row(static_cast<Eigen::Index>(i));
  const auto zz = apply_standardization(ztable, st, train);
  double max_shift = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    max_shift = std::max(max_shift, (zz.row(static_cast<Eigen::Index>(i)) - z.row(static_cast<Eigen::Index>(i))).cwiseAbs().maxCoeff());
  }
  CHECK(max_shift > 0.1);

  CHECK_THROWS_AS(fit_standardization(table, std::vector<int>{}), InputError);
}

TEST_CASE("correlation survey: exact extremes, flags, row-order invariance") {
  Rng rng(5);
  auto table = random_table(24, rng);
  for (int r = 0; r < 24; ++r) {
    table.values(r, 0) = static_cast<double>(table.labels[static_cast<std::size_t>(r)]);
    table.values(r, 1) = -static_cast<double>(table.labels[static_cast<std::size_t>(r)]);
    table.values(r, 2) = 7.0;  // zero variance
  }
  const auto survey = correlation_survey(table);
  REQUIRE(survey.size() == kFeatureCount);

  // Ranked by |r|: the two label copies lead, one positive, one negative.
  CHECK(std::abs(survey[0].r) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(survey[1].r) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(survey[0].r * survey[1].r < 0.0);
  CHECK(survey[0].p <= 1e-10);

  bool found_zero_var = false;
  for (const auto& row : survey) {
    if (row.feature == canonical_feature_names()[2]) {
      CHECK(row.zero_variance);
      CHECK(row.r == 0.0);
      found_zero_var = true;
    }
  }
  CHECK(found_zero_var);

  // Permuting rows leaves every feature's r unchanged.
  FeatureTable shuffled = table;
  std::vector<int> perm(24);
  for (int i = 0; i < 24; ++i) perm[static_cast<std::size_t>(i)] = (i * 7 + 3) % 24;
  for (int i = 0; i < 24; ++i) {
    shuffled.values.row(i) = table.values.row(perm[static_cast<std::size_t>(i)]);
    shuffled.labels[static_cast<std::size_t>(i)] =
        table.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  const auto survey2 = correlation_survey(shuffled);
  for (std::size_t i = 0; i < survey.size(); ++i) {
    CHECK(survey[i].feature == survey2[i].feature);
    CHECK(survey[i].r == doctest::Approx(survey2[i].r).epsilon(1e-12));
  }

  // Sorted by |r| descending.
  for (std::size_t i = 0; i + 1 < survey.size(); ++i) {
    CHECK(std::abs(survey[i].r) >= std::abs(survey[i + 1].r) - 1e-15);
  }
}

TEST_CASE("survey rejects degenerate tables") {
  Rng rng(6);
  auto table = random_table(10, rng);
  for (auto& l : table.labels) l = 1;
  CHECK_THROWS_AS(correlation_survey(table), InputError);
}

TEST_CASE("p-values of pure-noise features are uniform (KS sanity)") {
  Rng rng(7);
  const int trials = 500;
  const int n = 40;
  std::vector<double> pvals;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
  for (int t = 0; t < trials; ++t) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.next_gauss();
      const double y = labels[static_cast<std::size_t>(i)];
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
    const double r = (sxy - sx * sy / n) / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
    pvals.push_back(pearson_p_value(r, n));
  }
  std::sort(pvals.begin(), pvals.end());
  double ks = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double ecdf_hi = static_cast<double>(i + 1) / trials;
    const double ecdf_lo = static_cast<double>(i) / trials;
    ks = std::max({ks, std::abs(ecdf_hi - pvals[static_cast<std::size_t>(i)]),
                   std::abs(pvals[static_cast<std::size_t>(i)] - ecdf_lo)});
  }
  // alpha = 0.01 critical value for 500 samples.
  CHECK(ks <= 1.628 / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("density export: normal peak and unit mass") {
  Rng rng(8);
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 1000; ++i) {
    values.push_back(rng.next_gauss());
    labels.push_back(0);
  }
  for (int i = 0; i < 1000; ++i) {
    values.push_back(rng.next_gauss());
    labels.push_back(1);
  }
  const auto dens = density_export(values, labels);
  REQUIRE(dens.x.size() == 200);

  const auto peak_at = [&](const std::vector<double>& pdf) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < pdf.size(); ++i) {
      if (pdf[i] > pdf[best]) best = i;
    }
    return dens.x[best];
  };
  CHECK(std::abs(peak_at(dens.pdf_hc)) <= 0.1);
  CHECK(std::abs(peak_at(dens.pdf_als)) <= 0.1);

  auto integral = [&](const std::vector<double>& pdf) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pdf.size(); ++i) {
      acc += 0.5 * (pdf[i] + pdf[i + 1]) * (dens.x[i + 1] - dens.x[i]);
    }
    return acc;
  };
  CHECK(integral(dens.pdf_hc) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(integral(dens.pdf_als) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("density export: identical classes coincide; degenerate classes fail") {
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    const double v = 0.1 * i;
    values.push_back(v);
    labels.push_back(0);
    values.push_back(v);
    labels.push_back(1);
  }
  const auto dens = density_export(values, labels);
  for (std::size_t i = 0; i < dens.x.size(); ++i) {
    CHECK(dens.pdf_hc[i] == doctest::Approx(dens.pdf_als[i]).epsilon(1e-12));
  }

  std::vector<double> degen{1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0, 2.5, 2.2, 2.8};
  std::vector<int> dl{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  CHECK_THROWS_AS(density_export(degen, dl), ComputeError);  // zero-spread class

  std::vector<double> few{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  std::vector<int> fl{0, 0, 0, 1, 1, 1};
  CHECK_THROWS_AS(density_export(few, fl), ComputeError);  // < 5 per class
}

TEST_CASE("assemble rejects wrong-length vectors") {
  FeatureVector fv;
  fv.subject_id = "bad";
  fv.values.assign(130, 0.0);
  CHECK_THROWS_AS(table_from_rows(std::vector<FeatureVector>{fv}), InputError);
}

}  // TEST_SUITE
