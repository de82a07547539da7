#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <tuple>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include <survkit/csv.hpp>
#include <survkit/errors.hpp>
#include <survkit/measures.hpp>
#include <survkit/pipeline.hpp>
#include <survkit/resample.hpp>
#include <survkit/task.hpp>

namespace survkit {

struct BenchmarkRow {
  std::string task_id;
  std::string learner;  // pipeline descriptor
  int fold = 0;
  std::string measure;
  double score = std::numeric_limits<double>::quiet_NaN();
  bool errored = false;
  std::string error;
};

struct AggregateRow {
  std::string task_id;
  std::string learner;
  std::string measure;
  std::optional<double> score;  // empty when every fold errored
  int folds_scored = 0;
  int folds_errored = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;

  // Mean over non-errored folds per (task, learner, measure), in row order.
  std::vector<AggregateRow> aggregates() const {
    std::vector<AggregateRow> aggs;
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
    for (const auto& row : rows) {
      const auto key = std::make_tuple(row.task_id, row.learner, row.measure);
      auto it = index.find(key);
      if (it == index.end()) {
        index.emplace(key, aggs.size());
        aggs.push_back({row.task_id, row.learner, row.measure, std::nullopt, 0, 0});
        it = index.find(key);
      }
      auto& agg = aggs[it->second];
      if (row.errored) {
        ++agg.folds_errored;
      } else {
        ++agg.folds_scored;
        agg.score = agg.score.value_or(0.0) + row.score;
      }
    }
    for (auto& agg : aggs)
      if (agg.score) *agg.score /= static_cast<double>(agg.folds_scored);
    return aggs;
  }

  bool any_cell_fully_errored() const {
    for (const auto& agg : aggregates())
      if (!agg.score) return true;
    return false;
  }
};

namespace detail {

// Upfront design validation: every measure must name a prediction type the
// pipeline declares, before anything is fitted.
inline void validate_design(const std::vector<PipelineSpec>& pipelines,
                            const std::vector<MeasureSpec>& measures) {
  for (const auto& pipe : pipelines) {
    const auto declared = pipe.declared_types();
    for (const auto& m : measures) {
      m.validate();
      const PredictType need = measure_registry().at(m.id).required;
      if (!declared.count(need))
        throw SurvError(ErrorCode::ConfigError,
                        "measure '" + m.id + "' needs a " + std::string(predict_type_name(need)) +
                            " prediction, which pipeline '" + pipe.descriptor +
                            "' does not produce");
    }
  }
}

inline void run_jobs(int n_jobs, int threads, const std::function<void(int)>& job) {
  if (threads <= 1) {
    for (int j = 0; j < n_jobs; ++j) job(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n_jobs);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      int j;
      while ((j = next.fetch_add(1)) < n_jobs) job(j);
    });
  for (auto& t : pool) t.join();
}

// One (task, pipeline, fold) unit: fit on train, predict on test, score every
// measure. Fit/predict failures flag all the fold's measures; measure failures
// flag only their own row.
inline void score_fold(const SurvivalTask& task, const PipelineSpec& pipe, const Split& split,
                       const std::vector<MeasureSpec>& measures, BenchmarkRow* out) {
  try {
    const SurvivalTask train = task.subset(split.train);
    const SurvivalTask test = task.subset(split.test);
    const FittedPipeline fitted = fit_pipeline(pipe, train);
    const SurvivalPrediction pred = predict_pipeline(fitted, test);
    for (std::size_t m = 0; m < measures.size(); ++m) {
      try {
        out[m].score = evaluate_measure(measures[m], pred);
      } catch (const std::exception& e) {
        out[m].errored = true;
        out[m].error = e.what();
      }
    }
  } catch (const std::exception& e) {
    for (std::size_t m = 0; m < measures.size(); ++m) {
      out[m].errored = true;
      out[m].error = e.what();
    }
  }
}

}  // namespace detail

// Cross-product benchmark; splits are instantiated once per task and shared by
// every pipeline. Rows come back in (task, pipeline, fold, measure) order and
// are bit-identical for any thread count.
inline BenchmarkResult benchmark_grid(const std::vector<SurvivalTask>& tasks,
                                      const std::vector<PipelineSpec>& pipelines,
                                      const ResamplingSpec& resampling,
                                      const std::vector<MeasureSpec>& measures, int threads = 1) {
  if (tasks.empty() || pipelines.empty() || measures.empty())
    throw SurvError(ErrorCode::ConfigError, "benchmark needs tasks, learners and measures");
  resampling.validate();
  detail::validate_design(pipelines, measures);

  std::vector<std::vector<Split>> splits;
  splits.reserve(tasks.size());
  for (const auto& task : tasks) splits.push_back(instantiate(resampling, task));

  struct Job {
    std::size_t task, pipe;
    int fold;
    std::size_t row_offset;
  };
  std::vector<Job> jobs;
  std::size_t n_rows = 0;
  for (std::size_t t = 0; t < tasks.size(); ++t)
    for (std::size_t p = 0; p < pipelines.size(); ++p)
      for (int f = 0; f < static_cast<int>(splits[t].size()); ++f) {
        jobs.push_back({t, p, f, n_rows});
        n_rows += measures.size();
      }

  BenchmarkResult result;
  result.rows.resize(n_rows);
  for (const auto& job : jobs)
    for (std::size_t m = 0; m < measures.size(); ++m) {
      auto& row = result.rows[job.row_offset + m];
      row.task_id = tasks[job.task].id();
      row.learner = pipelines[job.pipe].descriptor;
      row.fold = job.fold;
      row.measure = measures[m].id;
    }

  detail::run_jobs(static_cast<int>(jobs.size()), threads, [&](int j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    detail::score_fold(tasks[job.task], pipelines[job.pipe],
                       splits[job.task][static_cast<std::size_t>(job.fold)], measures,
                       result.rows.data() + job.row_offset);
  });
  return result;
}

// Single task/pipeline convenience wrapper.
inline BenchmarkResult resample_eval(const SurvivalTask& task, const PipelineSpec& pipeline,
                                     const ResamplingSpec& resampling,
                                     const std::vector<MeasureSpec>& measures, int threads = 1) {
  return benchmark_grid({task}, {pipeline}, resampling, measures, threads);
}

inline void write_benchmark_csv(const BenchmarkResult& result, std::ostream& out) {
  out << "task,learner,fold,measure,score,errored,error\n";
  for (const auto& row : result.rows) {
    out << csv_escape(row.task_id) << ',' << csv_escape(row.learner) << ',' << row.fold << ','
        << csv_escape(row.measure) << ',' << (row.errored ? "" : format_double(row.score)) << ','
        << (row.errored ? 1 : 0) << ',' << csv_escape(row.error) << '\n';
  }
}

inline nlohmann::json benchmark_to_json(const BenchmarkResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.rows) {
    nlohmann::json r = {{"task", row.task_id},   {"learner", row.learner},
                        {"fold", row.fold},      {"measure", row.measure},
                        {"errored", row.errored}};
    if (row.errored)
      r["error"] = row.error;
    else
      r["score"] = row.score;
    rows.push_back(std::move(r));
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& agg : result.aggregates()) {
    nlohmann::json a = {{"task", agg.task_id},
                        {"learner", agg.learner},
                        {"measure", agg.measure},
                        {"folds_scored", agg.folds_scored},
                        {"folds_errored", agg.folds_errored}};
    a["score"] = agg.score ? nlohmann::json(*agg.score) : nlohmann::json();
    aggs.push_back(std::move(a));
  }
  return nlohmann::json{{"schema", 1}, {"rows", rows}, {"aggregates", aggs}};
}

}  // namespace survkit
