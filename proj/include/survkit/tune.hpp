#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <survkit/benchmark.hpp>
#include <survkit/errors.hpp>
#include <survkit/measures.hpp>
#include <survkit/pipeline.hpp>
#include <survkit/resample.hpp>
#include <survkit/rng.hpp>
#include <survkit/task.hpp>

namespace survkit {

using ParamAssignment = std::vector<std::pair<std::string, std::string>>;

struct TuneSpec {
  std::string method = "grid";  // grid | random
  std::vector<std::pair<std::string, std::vector<std::string>>> grid;
  int budget = 0;  // draws for random search
  std::uint64_t seed = 0;

  void validate() const {
    if (method != "grid" && method != "random")
      throw SurvError(ErrorCode::ConfigError, "tuning method must be 'grid' or 'random'");
    if (grid.empty()) throw SurvError(ErrorCode::EmptyGrid, "tuning grid has no parameters");
    for (const auto& [name, values] : grid)
      if (values.empty())
        throw SurvError(ErrorCode::EmptyGrid, "tuning parameter '" + name + "' has no values");
    if (method == "random" && budget < 1)
      throw SurvError(ErrorCode::EmptyGrid, "random search needs budget >= 1");
  }
};

namespace detail {

// Candidate order is the determinism anchor: grid = cartesian product with the
// last parameter varying fastest; random = seeded independent draws per slot.
inline std::vector<ParamAssignment> tune_candidates(const TuneSpec& spec) {
  spec.validate();
  std::vector<ParamAssignment> out;
  if (spec.method == "grid") {
    out.push_back({});
    for (const auto& [name, values] : spec.grid) {
      std::vector<ParamAssignment> next;
      for (const auto& base : out)
        for (const auto& v : values) {
          ParamAssignment a = base;
          a.emplace_back(name, v);
          next.push_back(std::move(a));
        }
      out = std::move(next);
    }
    return out;
  }
  Rng rng(derive_seed(spec.seed, "tune", 0));
  for (int b = 0; b < spec.budget; ++b) {
    ParamAssignment a;
    for (const auto& [name, values] : spec.grid)
      a.emplace_back(name, values[static_cast<std::size_t>(rng.below(static_cast<int>(values.size())))]);
    out.push_back(std::move(a));
  }
  return out;
}

inline PipelineSpec with_params(const PipelineSpec& base, const ParamAssignment& params) {
  PipelineSpec spec = base;
  for (const auto& [key, value] : params) apply_learner_param(spec.learner, key, value);
  return spec;
}

inline std::string params_label(const ParamAssignment& params) {
  std::string s = "{";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) s += ", ";
    s += params[i].first + "=" + params[i].second;
  }
  return s + "}";
}

}  // namespace detail

struct TuneFoldChoice {
  int outer_fold = 0;
  ParamAssignment params;
  std::optional<double> inner_score;
  bool errored = false;
  std::string error;
};

struct TuneResult {
  BenchmarkResult outer;  // one row per (outer fold, measure)
  std::vector<TuneFoldChoice> choices;
};

// Nested resampling: candidates are ranked by mean inner-resampling score on
// each outer-train split; a candidate erroring on any inner fold is
// disqualified. The winner is refit on the full outer-train split and scored
// on the outer-test split.
inline TuneResult tune_grid(const SurvivalTask& task, const PipelineSpec& base,
                            const TuneSpec& tune, const ResamplingSpec& inner,
                            const ResamplingSpec& outer, const MeasureSpec& measure) {
  measure.validate();
  const auto direction = measure_registry().at(measure.id).maximize;
  if (!direction)
    throw SurvError(ErrorCode::ConfigError,
                    "measure '" + measure.id + "' cannot be used as a tuning objective");
  const bool maximize = *direction;
  const auto candidates = detail::tune_candidates(tune);
  for (const auto& c : candidates) detail::with_params(base, c).declared_types();  // validate upfront

  TuneResult result;
  const auto outer_splits = instantiate(outer, task);
  for (int f = 0; f < static_cast<int>(outer_splits.size()); ++f) {
    const SurvivalTask outer_train = task.subset(outer_splits[static_cast<std::size_t>(f)].train);

    TuneFoldChoice choice;
    choice.outer_fold = f;
    std::string last_reason;
    bool have_best = false;
    PipelineSpec best_pipe = base;
    for (const auto& candidate : candidates) {
      const PipelineSpec pipe = detail::with_params(base, candidate);
      std::optional<double> score;
      try {
        const BenchmarkResult inner_result = resample_eval(outer_train, pipe, inner, {measure});
        double sum = 0.0;
        for (const auto& row : inner_result.rows) {
          if (row.errored) throw SurvError(ErrorCode::Nonconvergence, row.error);
          sum += row.score;
        }
        score = sum / static_cast<double>(inner_result.rows.size());
      } catch (const std::exception& e) {
        last_reason = e.what();
        std::cerr << "note: candidate " << detail::params_label(candidate)
                  << " disqualified on outer fold " << f << ": " << e.what() << "\n";
        continue;
      }
      if (!have_best || (maximize ? *score > *choice.inner_score : *score < *choice.inner_score)) {
        have_best = true;
        choice.params = candidate;
        choice.inner_score = score;
        best_pipe = pipe;
      }
    }

    BenchmarkRow row;
    row.task_id = task.id();
    row.learner = base.descriptor;
    row.fold = f;
    row.measure = measure.id;
    if (!have_best) {
      choice.errored = true;
      choice.error = "all candidates disqualified; last reason: " + last_reason;
      row.errored = true;
      row.error = choice.error;
    } else {
      try {
        const SurvivalTask outer_test = task.subset(outer_splits[static_cast<std::size_t>(f)].test);
        const FittedPipeline fitted = fit_pipeline(best_pipe, outer_train);
        row.score = evaluate_measure(measure, predict_pipeline(fitted, outer_test));
      } catch (const std::exception& e) {
        row.errored = true;
        row.error = e.what();
      }
    }
    result.outer.rows.push_back(std::move(row));
    result.choices.push_back(std::move(choice));
  }
  return result;
}

}  // namespace survkit
