// vowelmark: batch pipeline for sustained-vowel voice analysis.
//
// Commands: ingest, extract, survey, select, train, cv, pipeline, report.
// Exit codes: 0 success, 1 input error, 2 computation error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "vowelmark/dataset.hpp"
#include "vowelmark/extract.hpp"
#include "vowelmark/featureset.hpp"
#include "vowelmark/model.hpp"
#include "vowelmark/select.hpp"
#include "vowelmark/util.hpp"

namespace fs = std::filesystem;
using namespace vowelmark;

namespace {

struct Options {
  std::string corpus_dir;
  std::string manifest;
  std::string out_dir;
  std::uint64_t seed = 20200131;
  int folds = 8;
  int reps = 40;
  std::string fs_method = "lasso";
  int k_neighbors = 11;
  std::string subset_file;
  std::string model_file;
  int threads = 0;  // 0 = hardware default
  bool loso = false;
};

std::string table_path(const Options& opt) { return (fs::path(opt.out_dir) / "features.csv").string(); }

FeatureTable load_table(const Options& opt) {
  const std::string path = table_path(opt);
  if (!fs::exists(path)) {
    throw InputError("feature table not found: " + path + " (run 'extract' first)");
  }
  return read_feature_table(path);
}

std::vector<int> load_subset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open subset file: " + path);
  std::vector<int> subset;
  std::string line;
  while (std::getline(in, line)) {
    const std::string name = trim_ws(line);
    if (name.empty() || name[0] == '#') continue;
    const int idx = feature_index(name);
    if (idx < 0) throw InputError("subset file names unknown feature '" + name + "'");
    subset.push_back(idx);
  }
  if (subset.empty()) throw InputError("subset file is empty: " + path);
  return subset;
}

void write_subset(const std::string& path, std::span<const int> subset) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write subset file: " + path);
  const auto& names = canonical_feature_names();
  for (int idx : subset) out << names[static_cast<std::size_t>(idx)] << '\n';
}

void ensure_out_dir(const Options& opt) {
  if (opt.out_dir.empty()) throw InputError("--out is required");
  fs::create_directories(opt.out_dir);
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Options& opt) {
  if (opt.manifest.empty()) throw InputError("--manifest (output path) is required");
  auto entries = scan_corpus_layout(opt.corpus_dir);
  if (entries.empty()) throw InputError("no recognizable recordings under " + opt.corpus_dir);
  write_manifest(opt.manifest, entries);
  // Validate what we just wrote (pairing, file existence).
  const auto m = load_corpus(opt.manifest);
  std::cout << "manifest: " << opt.manifest << " (" << m.n_subjects << " subjects, " << m.n_als
            << " ALS, " << m.n_hc << " HC)\n";
  return 0;
}

int cmd_extract(const Options& opt) {
  if (opt.manifest.empty()) throw InputError("--manifest is required");
  ensure_out_dir(opt);
  const auto manifest = load_corpus(opt.manifest);
  std::vector<RecordingLog> log;
  const auto table = extract_features(manifest, opt.threads, &log);
  write_feature_table(table_path(opt), table);
  write_extraction_log((fs::path(opt.out_dir) / "extract_log.csv").string(), log);

  int failures = 0;
  for (const auto& r : log) {
    if (r.status != "ok") ++failures;
  }
  std::cout << "features: " << table_path(opt) << " (" << table.rows() << " subjects, "
            << table.cols() << " features, " << failures << " recordings with issues)\n";
  return 0;
}

int cmd_survey(const Options& opt) {
  const auto table = load_table(opt);
  const auto survey = correlation_survey(table);

  const std::string survey_path = (fs::path(opt.out_dir) / "survey.csv").string();
  std::ofstream out(survey_path);
  if (!out) throw InputError("cannot write " + survey_path);
  out << "rank,feature,r,p,p_threshold\n";
  for (std::size_t i = 0; i < survey.size(); ++i) {
    const auto& row = survey[i];
    // Threshold form mirrors the usual reporting style (p < 10^k steps).
    double threshold = 1.0;
    for (double t : {0.05, 0.01, 0.001, 1e-4, 1e-5, 1e-6}) {
      if (row.p < t) threshold = t;
    }
    out << (i + 1) << ',' << row.feature << ',' << format_double(row.r) << ','
        << format_double(row.p) << ',' << (threshold < 1.0 ? "p<" + format_double(threshold) : "ns")
        << '\n';
  }

  // Density exports for the strongest features.
  const int top_n = std::min<std::size_t>(8, survey.size());
  for (int i = 0; i < top_n; ++i) {
    const auto& row = survey[static_cast<std::size_t>(i)];
    std::vector<double> col(static_cast<std::size_t>(table.rows()));
    for (int r = 0; r < table.rows(); ++r) col[static_cast<std::size_t>(r)] = table.values(r, row.index);
    try {
      const auto dens = density_export(col, table.labels);
      const std::string path = (fs::path(opt.out_dir) / ("density_" + row.feature + ".csv")).string();
      std::ofstream dout(path);
      dout << "x,pdf_hc,pdf_als\n";
      for (std::size_t k = 0; k < dens.x.size(); ++k) {
        dout << format_double(dens.x[k]) << ',' << format_double(dens.pdf_hc[k]) << ','
             << format_double(dens.pdf_als[k]) << '\n';
      }
    } catch (const ComputeError& e) {
      log_warn(std::string("density export skipped for ") + row.feature + ": " + e.what());
    }
  }
  std::cout << "survey: " << survey_path << '\n';
  return 0;
}

int cmd_select(const Options& opt) {
  const auto table = load_table(opt);
  const FsMethod method = parse_fs_method(opt.fs_method);
  FeatureRanking ranking;
  switch (method) {
    case FsMethod::QoV: ranking = rank_qov(table); break;
    case FsMethod::Relief: ranking = rank_relief(table); break;
    case FsMethod::RelieFF: ranking = rank_relieff(table, opt.k_neighbors); break;
    case FsMethod::Lasso: ranking = rank_lasso(table); break;
  }
  const std::string path =
      (fs::path(opt.out_dir) / ("ranking_" + fs_method_name(method) + ".csv")).string();
  write_ranking(path, ranking, table.names);
  std::cout << "ranking: " << path << '\n';
  return 0;
}

int cmd_train(const Options& opt) {
  const auto table = load_table(opt);
  std::vector<int> subset;
  if (!opt.subset_file.empty()) subset = load_subset(opt.subset_file);
  const auto model = train_model(table, subset);
  const std::string path = (fs::path(opt.out_dir) / "model.json").string();
  write_model(path, model);
  std::cout << "model: " << path << " (" << model.feature_names.size() << " features, gamma "
            << format_double(model.gamma) << ")\n";
  return 0;
}

int cmd_cv(const Options& opt) {
  const auto table = load_table(opt);
  std::vector<int> subset;
  if (!opt.subset_file.empty()) subset = load_subset(opt.subset_file);

  EvalReport report;
  std::string title;
  if (opt.loso) {
    report = loso_cv(table, subset);
    title = "leave-one-subject-out CV, " + std::to_string(table.rows()) + " subjects";
  } else {
    report = stratified_kfold_cv(table, subset, opt.folds, opt.reps, opt.seed, opt.threads);
    title = "stratified " + std::to_string(opt.folds) + "-fold CV x" + std::to_string(opt.reps) +
            ", seed " + std::to_string(opt.seed);
  }
  const std::string path = (fs::path(opt.out_dir) / "cv_report.txt").string();
  write_report(path, report, title);
  std::cout << "cv: acc " << format_double(report.acc_mean) << " +- " << format_double(report.acc_sd)
            << ", sens " << format_double(report.sens_mean) << ", spec "
            << format_double(report.spec_mean) << " -> " << path << '\n';
  return 0;
}

int cmd_pipeline(const Options& opt) {
  const auto table = load_table(opt);
  const FsMethod method = parse_fs_method(opt.fs_method);

  FeatureRanking ranking;
  switch (method) {
    case FsMethod::QoV: ranking = rank_qov(table); break;
    case FsMethod::Relief: ranking = rank_relief(table); break;
    case FsMethod::RelieFF: ranking = rank_relieff(table, opt.k_neighbors); break;
    case FsMethod::Lasso: ranking = rank_lasso(table); break;
  }
  write_ranking((fs::path(opt.out_dir) / ("ranking_" + fs_method_name(method) + ".csv")).string(),
                ranking, table.names);

  log_info("pipeline: building CV cache (" + std::to_string(opt.folds) + " folds x " +
           std::to_string(opt.reps) + " reps)");
  const CvCache cache(table, opt.folds, opt.reps, opt.seed);

  // Accuracy as a function of subset size along the ranking.
  const std::string curve_path = (fs::path(opt.out_dir) / "accuracy_vs_n.csv").string();
  std::ofstream curve(curve_path);
  if (!curve) throw InputError("cannot write " + curve_path);
  curve << "n,acc_mean,acc_sd,sens_mean,sens_sd,spec_mean,spec_sd\n";

  int best_n = 1;
  double best_acc = -1.0;
  for (int n = 1; n <= static_cast<int>(ranking.order.size()); ++n) {
    const std::vector<int> subset(ranking.order.begin(), ranking.order.begin() + n);
    const auto rep = cache.evaluate(subset, opt.threads);
    curve << n << ',' << format_double(rep.acc_mean) << ',' << format_double(rep.acc_sd) << ','
          << format_double(rep.sens_mean) << ',' << format_double(rep.sens_sd) << ','
          << format_double(rep.spec_mean) << ',' << format_double(rep.spec_sd) << '\n';
    if (rep.acc_mean > best_acc) {
      best_acc = rep.acc_mean;
      best_n = n;
    }
  }
  log_info("pipeline: best subset size " + std::to_string(best_n) + " (acc " +
           format_double(best_acc) + ")");

  // Backward-stepwise refinement of the best subset.
  std::vector<int> best_subset(ranking.order.begin(), ranking.order.begin() + best_n);
  std::vector<BssRound> trace;
  const auto final_subset = backward_stepwise(
      best_subset, [&](std::span<const int> s) { return cache.accuracy(s, opt.threads); }, &trace);

  const std::string trace_path = (fs::path(opt.out_dir) / "bss_trace.csv").string();
  std::ofstream tout(trace_path);
  tout << "round,removed_feature,accuracy\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    tout << i << ','
         << (trace[i].removed_feature < 0
                 ? std::string("-")
                 : table.names[static_cast<std::size_t>(trace[i].removed_feature)])
         << ',' << format_double(trace[i].accuracy) << '\n';
  }

  write_subset((fs::path(opt.out_dir) / "subset.txt").string(), final_subset);

  const auto report = cache.evaluate(final_subset, opt.threads);
  write_report((fs::path(opt.out_dir) / "report.txt").string(), report,
               fs_method_name(method) + " + BSS, " + std::to_string(final_subset.size()) +
                   " features, stratified " + std::to_string(opt.folds) + "-fold CV x" +
                   std::to_string(opt.reps) + ", seed " + std::to_string(opt.seed));

  const auto model = train_model(table, final_subset);
  write_model((fs::path(opt.out_dir) / "model.json").string(), model);

  std::cout << "pipeline: " << fs_method_name(method) << " best N=" << best_n << " -> BSS "
            << final_subset.size() << " features, acc " << format_double(report.acc_mean) << " +- "
            << format_double(report.acc_sd) << " (sens " << format_double(report.sens_mean)
            << ", spec " << format_double(report.spec_mean) << ")\n";
  return 0;
}

int cmd_report(const Options& opt) {
  const auto table = load_table(opt);
  const std::string model_path =
      opt.model_file.empty() ? (fs::path(opt.out_dir) / "model.json").string() : opt.model_file;
  const auto model = read_model(model_path);

  Confusion conf;
  for (int r = 0; r < table.rows(); ++r) {
    std::vector<double> row;
    row.reserve(model.feature_indices.size());
    for (int idx : model.feature_indices) row.push_back(table.values(r, idx));
    const auto pred = predict(model, row);
    const int truth = table.labels[static_cast<std::size_t>(r)];
    if (truth == 1 && pred.label == 1) ++conf.tp;
    else if (truth == 0 && pred.label == 0) ++conf.tn;
    else if (truth == 0 && pred.label == 1) ++conf.fp;
    else ++conf.fn;
  }
  const auto m = metrics(conf);
  std::cout << "model " << model_path << " on " << table.rows() << " subjects:\n"
            << "  tp " << conf.tp << " tn " << conf.tn << " fp " << conf.fp << " fn " << conf.fn
            << "\n  acc " << format_double(m.acc) << "%, sens "
            << (m.sens_defined ? format_double(m.sens) + "%" : "undefined") << ", spec "
            << (m.spec_defined ? format_double(m.spec) + "%" : "undefined") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  log_init_from_env();

  CLI::App app{"sustained-vowel acoustic analysis and ALS/HC classification"};
  app.require_subcommand(1);

  Options opt;

  auto add_common = [&](CLI::App* cmd, bool with_out = true) {
    if (with_out) cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--threads", opt.threads, "worker thread cap (0 = hardware)");
    cmd->add_option("--seed", opt.seed, "RNG seed for randomized steps");
  };

  auto* ingest = app.add_subcommand("ingest", "scan a corpus directory into a manifest");
  ingest->add_option("corpus_dir", opt.corpus_dir, "corpus root directory")->required();
  ingest->add_option("--manifest", opt.manifest, "manifest output path")->required();

  auto* extract = app.add_subcommand("extract", "extract the 131-feature table from a manifest");
  extract->add_option("--manifest", opt.manifest, "corpus manifest")->required();
  add_common(extract);

  auto* survey = app.add_subcommand("survey", "correlation survey and density exports");
  add_common(survey);

  auto* select = app.add_subcommand("select", "rank features (qov|relief|relieff|lasso)");
  select->add_option("--fs", opt.fs_method, "feature-selection method");
  select->add_option("--k-neighbors", opt.k_neighbors, "RelieFF neighbor count");
  add_common(select);

  auto* train = app.add_subcommand("train", "train an LDA model on the full table");
  train->add_option("--subset", opt.subset_file, "feature subset file (one name per line)");
  add_common(train);

  auto* cv = app.add_subcommand("cv", "cross-validate a feature subset");
  cv->add_option("--subset", opt.subset_file, "feature subset file");
  cv->add_option("--folds", opt.folds, "stratified fold count");
  cv->add_option("--reps", opt.reps, "repetition count");
  cv->add_flag("--loso", opt.loso, "leave-one-subject-out instead of k-fold");
  add_common(cv);

  auto* pipeline = app.add_subcommand("pipeline", "ranking + size sweep + BSS + final model");
  pipeline->add_option("--fs", opt.fs_method, "feature-selection method");
  pipeline->add_option("--k-neighbors", opt.k_neighbors, "RelieFF neighbor count");
  pipeline->add_option("--folds", opt.folds, "stratified fold count");
  pipeline->add_option("--reps", opt.reps, "repetition count");
  add_common(pipeline);

  auto* report = app.add_subcommand("report", "apply a model to the feature table");
  report->add_option("--model", opt.model_file, "model file (default <out>/model.json)");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(opt);
    if (extract->parsed()) return cmd_extract(opt);
    if (survey->parsed()) return cmd_survey(opt);
    if (select->parsed()) return cmd_select(opt);
    if (train->parsed()) return cmd_train(opt);
    if (cv->parsed()) return cmd_cv(opt);
    if (pipeline->parsed()) return cmd_pipeline(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const InputError& e) {
    log_error(e.what());
    return 1;
  } catch (const ComputeError& e) {
    log_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log_error(std::string("unexpected: ") + e.what());
    return 2;
  }
  return 0;
}
