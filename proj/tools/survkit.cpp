#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <survkit/survkit.hpp>

namespace {

using nlohmann::json;

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string piece = text.substr(start, comma - start);
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(piece, &pos));
      if (pos != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw survkit::SurvError(survkit::ErrorCode::ConfigError,
                               "cannot parse number '" + piece + "' in list '" + text + "'");
    }
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(survkit::detail::trim(text.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

struct SimulateArgs {
  int n = 100;
  int p = 0;
  std::string beta;
  double shape = 1.0;
  double rate = 1.0;
  double cens_rate = 0.0;
  double cens_time = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  survkit::SimSpec spec;
  spec.n = args.n;
  spec.p = args.p;
  spec.shape = args.shape;
  spec.rate = args.rate;
  spec.cens_rate = args.cens_rate;
  if (args.cens_time > 0.0) spec.cens_time = args.cens_time;
  spec.seed = args.seed;
  if (!args.beta.empty()) {
    const auto values = parse_double_list(args.beta);
    spec.beta = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()));
  } else {
    spec.beta = Eigen::VectorXd::Zero(spec.p);
  }

  const survkit::SurvivalTask task = survkit::simulate(spec);
  std::ofstream out(args.out, std::ios::binary);
  if (!out)
    throw survkit::SurvError(survkit::ErrorCode::ConfigError, "cannot write '" + args.out + "'");
  survkit::write_task_csv(task, out);

  json sidecar = {{"n", spec.n},
                  {"p", spec.p},
                  {"beta", std::vector<double>(spec.beta.data(), spec.beta.data() + spec.beta.size())},
                  {"shape", spec.shape},
                  {"rate", spec.rate},
                  {"cens_rate", spec.cens_rate},
                  {"seed", spec.seed}};
  sidecar["cens_time"] = spec.cens_time ? json(*spec.cens_time) : json();
  survkit::write_json_file(sidecar, args.out + ".json");
  return 0;
}

survkit::MeasureSpec measure_from_json(const json& j) {
  survkit::MeasureSpec spec;
  if (j.is_string()) {
    spec.id = j.get<std::string>();
  } else {
    spec.id = j.at("id").get<std::string>();
    if (j.contains("tau")) spec.tau = j.at("tau").get<double>();
    if (j.contains("eps")) spec.eps = j.at("eps").get<double>();
  }
  spec.validate();
  return spec;
}

survkit::ResamplingSpec resampling_from_json(const json& j) {
  survkit::ResamplingSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  if (j.contains("folds")) spec.folds = j.at("folds").get<int>();
  if (j.contains("train_ratio")) spec.train_ratio = j.at("train_ratio").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("stratify")) spec.stratify = j.at("stratify").get<bool>();
  spec.validate();
  return spec;
}

// Duplicate descriptors get a "#k" suffix so result rows stay distinguishable.
std::vector<survkit::PipelineSpec> pipelines_from_json(const json& learners) {
  std::vector<survkit::PipelineSpec> pipelines;
  std::map<std::string, int> seen;
  for (const auto& entry : learners) {
    auto spec = survkit::PipelineSpec::parse(entry.get<std::string>());
    const int count = ++seen[spec.descriptor];
    if (count > 1) spec.descriptor += " #" + std::to_string(count);
    pipelines.push_back(std::move(spec));
  }
  return pipelines;
}

int cmd_benchmark(const std::string& config_path, int threads) {
  const json config = survkit::parse_json_file(config_path);

  std::vector<survkit::SurvivalTask> tasks;
  std::vector<survkit::EncodingManifest> manifests;
  for (const auto& t : config.at("tasks")) {
    const std::string path = t.at("path").get<std::string>();
    const std::string time_col = t.value("time_col", "time");
    const std::string event_col = t.value("event_col", "status");
    const std::string id = t.value("id", std::filesystem::path(path).stem().string());
    auto ingested = survkit::ingest_csv_file(path, time_col, event_col, id);
    tasks.push_back(std::move(ingested.task));
    manifests.push_back(std::move(ingested.manifest));
  }

  const auto pipelines = pipelines_from_json(config.at("learners"));
  const auto resampling = resampling_from_json(config.at("resampling"));
  std::vector<survkit::MeasureSpec> measures;
  for (const auto& m : config.at("measures")) measures.push_back(measure_from_json(m));
  const std::string output_dir = config.at("output_dir").get<std::string>();

  const survkit::BenchmarkResult result =
      survkit::benchmark_grid(tasks, pipelines, resampling, measures, threads);

  std::filesystem::create_directories(output_dir);
  {
    std::ofstream out(std::filesystem::path(output_dir) / "results.csv", std::ios::binary);
    survkit::write_benchmark_csv(result, out);
  }
  survkit::write_json_file(survkit::benchmark_to_json(result),
                           (std::filesystem::path(output_dir) / "aggregates.json").string());
  for (std::size_t i = 0; i < tasks.size(); ++i)
    survkit::write_json_file(survkit::manifest_to_json(manifests[i]),
                             (std::filesystem::path(output_dir) /
                              (tasks[i].id() + "_manifest.json"))
                                 .string());

  // aggregate table, cells ordered by the first measure's score
  auto aggs = result.aggregates();
  const std::string& first_measure = measures.front().id;
  std::map<std::pair<std::string, std::string>, double> order;
  for (const auto& a : aggs)
    if (a.measure == first_measure)
      order[{a.task_id, a.learner}] =
          a.score ? *a.score : std::numeric_limits<double>::infinity();
  std::stable_sort(aggs.begin(), aggs.end(), [&](const auto& x, const auto& y) {
    return order[{x.task_id, x.learner}] < order[{y.task_id, y.learner}];
  });
  std::cout << "task,learner,measure,score,folds_scored,folds_errored\n";
  for (const auto& a : aggs)
    std::cout << survkit::csv_escape(a.task_id) << ',' << survkit::csv_escape(a.learner) << ','
              << a.measure << ',' << (a.score ? survkit::format_double(*a.score) : "") << ','
              << a.folds_scored << ',' << a.folds_errored << '\n';

  if (result.any_cell_fully_errored()) {
    std::cerr << "benchmark completed with fully errored cells\n";
    return 1;
  }
  return 0;
}

struct PredictArgs {
  std::string learner;
  std::string model;
  std::string data;
  std::string time_col = "time";
  std::string event_col = "status";
  std::string save_model;
  std::string out;
};

json pipeline_to_json(const survkit::FittedPipeline& fp,
                      const survkit::EncodingManifest& manifest) {
  json j = survkit::model_to_json(fp.model, manifest);
  if (!fp.spec.stages.empty()) {
    json baselines = json::array();
    for (const auto& b : fp.baselines)
      baselines.push_back(b ? survkit::model_to_json(*b) : json());
    j["pipeline"] = {{"descriptor", fp.spec.descriptor}, {"baselines", baselines}};
  }
  return j;
}

struct LoadedPipeline {
  survkit::FittedPipeline fitted;
  std::optional<survkit::EncodingManifest> encoding;
};

LoadedPipeline pipeline_from_json(const json& j) {
  LoadedPipeline loaded;
  auto saved = survkit::model_from_json(j);
  loaded.fitted.model = std::move(saved.model);
  loaded.encoding = std::move(saved.encoding);
  if (j.contains("pipeline")) {
    loaded.fitted.spec =
        survkit::PipelineSpec::parse(j.at("pipeline").at("descriptor").get<std::string>());
    for (const auto& b : j.at("pipeline").at("baselines"))
      loaded.fitted.baselines.push_back(
          b.is_null() ? std::nullopt
                      : std::optional<survkit::FittedModel>(survkit::model_from_json(b).model));
  } else {
    loaded.fitted.spec.descriptor = loaded.fitted.model.learner;
    loaded.fitted.spec.learner.id = loaded.fitted.model.learner;
  }
  return loaded;
}

survkit::SurvivalTask task_from_manifest(const survkit::EncodingManifest& manifest,
                                         const survkit::CsvTable& table, const std::string& id) {
  auto [features, names] = survkit::apply_manifest(manifest, table);
  const int tcol = table.column(manifest.time_col);
  const int ecol = table.column(manifest.event_col);
  const int n = static_cast<int>(table.rows.size());
  Eigen::VectorXd time(n);
  Eigen::VectorXi status(n);
  for (int r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    double t;
    if (!survkit::detail::parse_double_strict(row[static_cast<std::size_t>(tcol)], t))
      throw survkit::SurvError(survkit::ErrorCode::InvalidArgument,
                               "cannot parse time value '" + row[static_cast<std::size_t>(tcol)] +
                                   "' at data row " + std::to_string(r + 1));
    time[r] = t;
    status[r] = survkit::detail::parse_event(row[static_cast<std::size_t>(ecol)],
                                             static_cast<std::size_t>(r));
  }
  return survkit::SurvivalTask(id, std::move(features), std::move(names), std::move(time),
                               std::move(status));
}

int cmd_predict(const PredictArgs& args) {
  if (args.learner.empty() == args.model.empty())
    throw survkit::SurvError(survkit::ErrorCode::ConfigError,
                             "exactly one of --learner and --model is required");

  if (!args.learner.empty()) {
    const auto spec = survkit::PipelineSpec::parse(args.learner);
    auto ingested = survkit::ingest_csv_file(args.data, args.time_col, args.event_col, "train");
    const auto fitted = survkit::fit_pipeline(spec, ingested.task);
    if (!args.save_model.empty())
      survkit::write_json_file(pipeline_to_json(fitted, ingested.manifest), args.save_model);
    if (!args.out.empty()) {
      const auto pred = survkit::predict_pipeline(fitted, ingested.task);
      survkit::write_json_file(survkit::prediction_to_json(pred), args.out);
    }
    return 0;
  }

  auto loaded = pipeline_from_json(survkit::parse_json_file(args.model));
  const survkit::CsvTable table = survkit::read_csv(args.data);
  survkit::SurvivalTask newdata =
      loaded.encoding
          ? task_from_manifest(*loaded.encoding, table, "newdata")
          : survkit::ingest_csv(table, args.time_col, args.event_col, "newdata").task;
  const auto pred = survkit::predict_pipeline(loaded.fitted, newdata);
  if (args.out.empty())
    throw survkit::SurvError(survkit::ErrorCode::ConfigError, "--out is required with --model");
  survkit::write_json_file(survkit::prediction_to_json(pred), args.out);
  return 0;
}

struct CalibArgs {
  std::string learner;
  std::string model;
  std::string data;
  std::string time_col = "time";
  std::string event_col = "status";
  std::string out;
};

int cmd_calibplot(const CalibArgs& args) {
  if (args.learner.empty() == args.model.empty())
    throw survkit::SurvError(survkit::ErrorCode::ConfigError,
                             "exactly one of --learner and --model is required");
  survkit::SurvivalPrediction pred;
  if (!args.learner.empty()) {
    const auto spec = survkit::PipelineSpec::parse(args.learner);
    if (!spec.declared_types().count(survkit::PredictType::Distr))
      throw survkit::SurvError(survkit::ErrorCode::MissingDistr,
                               "pipeline '" + spec.descriptor + "' does not produce a distr");
    auto ingested = survkit::ingest_csv_file(args.data, args.time_col, args.event_col, "calib");
    pred = survkit::predict_pipeline(survkit::fit_pipeline(spec, ingested.task), ingested.task);
  } else {
    auto loaded = pipeline_from_json(survkit::parse_json_file(args.model));
    const survkit::CsvTable table = survkit::read_csv(args.data);
    survkit::SurvivalTask newdata =
        loaded.encoding
            ? task_from_manifest(*loaded.encoding, table, "calib")
            : survkit::ingest_csv(table, args.time_col, args.event_col, "calib").task;
    pred = survkit::predict_pipeline(loaded.fitted, newdata);
  }
  const survkit::CalibCurve curve = survkit::calib_curve(pred);
  std::ofstream out(args.out, std::ios::binary);
  if (!out)
    throw survkit::SurvError(survkit::ErrorCode::ConfigError, "cannot write '" + args.out + "'");
  out << "t,mean_pred_surv,km_surv\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out << survkit::format_double(curve.grid[i]) << ','
        << survkit::format_double(curve.mean_pred_surv[i]) << ','
        << survkit::format_double(curve.km_surv[i]) << '\n';
  return 0;
}

int cmd_score(const std::string& pred_path, const std::string& measures_arg, double tau) {
  const auto pred = survkit::prediction_from_json(survkit::parse_json_file(pred_path));
  std::cout << "measure,score\n";
  for (const std::string& id : split_list(measures_arg)) {
    survkit::MeasureSpec spec;
    spec.id = id;
    if (tau > 0.0) spec.tau = tau;
    std::cout << id << ',' << survkit::format_double(survkit::evaluate_measure(spec, pred)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survival analysis toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a right-censored survival dataset");
  simulate->add_option("--n", sim.n, "observations");
  simulate->add_option("--p", sim.p, "covariates");
  simulate->add_option("--beta", sim.beta, "comma-separated true coefficients");
  simulate->add_option("--shape", sim.shape, "baseline Weibull shape");
  simulate->add_option("--rate", sim.rate, "baseline Weibull rate");
  simulate->add_option("--cens-rate", sim.cens_rate, "exponential censoring rate (0 = none)");
  simulate->add_option("--cens-time", sim.cens_time, "administrative censoring time");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out, "output CSV path")->required();

  std::string bench_config;
  int bench_threads = 1;
  auto* benchmark = app.add_subcommand("benchmark", "run a benchmark grid from a JSON config");
  benchmark->add_option("--config", bench_config, "JSON config path")->required();
  benchmark->add_option("--threads", bench_threads, "worker threads");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "fit+save or load+predict");
  predict->add_option("--learner", pr.learner, "pipeline descriptor to fit");
  predict->add_option("--model", pr.model, "saved model JSON to load");
  predict->add_option("--data", pr.data, "CSV data path")->required();
  predict->add_option("--time-col", pr.time_col, "time column");
  predict->add_option("--event-col", pr.event_col, "event column");
  predict->add_option("--save-model", pr.save_model, "write fitted model JSON here");
  predict->add_option("--out", pr.out, "write prediction JSON here");

  CalibArgs cal;
  auto* calibplot = app.add_subcommand("calibplot", "calibration curve data as CSV");
  calibplot->add_option("--learner", cal.learner, "pipeline descriptor to fit");
  calibplot->add_option("--model", cal.model, "saved model JSON to load");
  calibplot->add_option("--data", cal.data, "CSV data path")->required();
  calibplot->add_option("--time-col", cal.time_col, "time column");
  calibplot->add_option("--event-col", cal.event_col, "event column");
  calibplot->add_option("--out", cal.out, "output CSV path")->required();

  std::string score_pred, score_measures;
  double score_tau = 0.0;
  auto* score = app.add_subcommand("score", "score a saved prediction JSON");
  score->add_option("--pred", score_pred, "prediction JSON path")->required();
  score->add_option("--measures", score_measures, "comma-separated measure ids")->required();
  score->add_option("--tau", score_tau, "cutoff time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*benchmark) return cmd_benchmark(bench_config, bench_threads);
    if (*predict) return cmd_predict(pr);
    if (*calibplot) return cmd_calibplot(cal);
    if (*score) return cmd_score(score_pred, score_measures, score_tau);
  } catch (const survkit::SurvError& e) {
    std::cerr << "error [" << survkit::error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
