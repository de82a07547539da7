#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <survkit/compose.hpp>
#include <survkit/errors.hpp>
#include <survkit/learners.hpp>
#include <survkit/task.hpp>

namespace survkit {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

struct StageCall {
  std::string name;
  std::vector<std::pair<std::string, std::string>> args;  // key empty for positional
};

// "name(k=v, w)" -> {name, [(k,v), ("",w)]}
inline StageCall parse_stage(const std::string& raw) {
  const std::string s = trim(raw);
  StageCall call;
  const std::size_t open = s.find('(');
  if (open == std::string::npos) {
    call.name = s;
    return call;
  }
  if (s.back() != ')')
    throw SurvError(ErrorCode::ConfigError, "malformed stage '" + s + "': missing ')'");
  call.name = trim(s.substr(0, open));
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::size_t start = 0;
  while (start <= inner.size()) {
    std::size_t comma = inner.find(',', start);
    if (comma == std::string::npos) comma = inner.size();
    const std::string piece = trim(inner.substr(start, comma - start));
    if (!piece.empty()) {
      const std::size_t eq = piece.find('=');
      if (eq == std::string::npos)
        call.args.emplace_back("", piece);
      else
        call.args.emplace_back(trim(piece.substr(0, eq)), trim(piece.substr(eq + 1)));
    } else if (comma < inner.size() || start < inner.size()) {
      throw SurvError(ErrorCode::ConfigError, "malformed argument list in '" + s + "'");
    }
    start = comma + 1;
  }
  if (call.name.empty()) throw SurvError(ErrorCode::ConfigError, "empty stage name in '" + s + "'");
  return call;
}

inline double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw SurvError(ErrorCode::ConfigError, "cannot parse numeric value '" + v + "' for " + key);
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw SurvError(ErrorCode::ConfigError, "cannot parse bool value '" + v + "' for " + key);
}

}  // namespace detail

struct CompositorSpec {
  std::string kind;                // distrcompositor | crankcompositor
  std::string estimator = "kaplan";  // distrcompositor baseline
  std::string form = "ph";
  std::string summary = "mean";  // crankcompositor
  bool overwrite_crank = true;
  bool set_response = true;
};

// Hyperparameter assignment shared by descriptor parsing and the tuner.
inline void apply_learner_param(LearnerSpec& spec, const std::string& key, const std::string& value) {
  if (spec.id == "coxph") {
    if (key == "ties") {
      if (value != "efron" && value != "breslow")
        throw SurvError(ErrorCode::ConfigError, "ties must be 'efron' or 'breslow'");
      spec.cox.ties = value;
      return;
    }
    if (key == "max_iter") {
      spec.cox.max_iter = static_cast<int>(detail::parse_number(key, value));
      return;
    }
    if (key == "tol") {
      spec.cox.tol = detail::parse_number(key, value);
      return;
    }
    if (key == "ridge") {
      spec.cox.ridge = detail::parse_number(key, value);
      return;
    }
  } else if (spec.id == "weibull_aft") {
    if (key == "max_iter") {
      spec.weibull.max_iter = static_cast<int>(detail::parse_number(key, value));
      return;
    }
    if (key == "tol") {
      spec.weibull.tol = detail::parse_number(key, value);
      return;
    }
  }
  throw SurvError(ErrorCode::ConfigError,
                  "unknown parameter '" + key + "' for learner '" + spec.id + "'");
}

// A linear pipeline: one learner optionally followed by compositor stages,
// written "learner | stage | stage", e.g.
// "coxph(ties=breslow) | distrcompositor(estimator=kaplan, form=ph)".
struct PipelineSpec {
  std::string descriptor;
  LearnerSpec learner;
  std::vector<CompositorSpec> stages;

  static PipelineSpec parse(const std::string& text);
  std::set<PredictType> declared_types() const;
};

inline PipelineSpec PipelineSpec::parse(const std::string& text) {
  PipelineSpec spec;
  spec.descriptor = detail::trim(text);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t bar = text.find('|', start);
    parts.push_back(text.substr(start, bar == std::string::npos ? bar : bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  if (parts.empty() || detail::trim(parts[0]).empty())
    throw SurvError(ErrorCode::ConfigError, "empty pipeline descriptor");

  static const std::set<std::string> learner_ids = {"kaplan", "nelson", "coxph", "weibull_aft"};
  const auto head = detail::parse_stage(parts[0]);
  if (learner_ids.find(head.name) == learner_ids.end())
    throw SurvError(ErrorCode::ConfigError, "unknown learner '" + head.name + "'");
  spec.learner.id = head.name;
  for (const auto& [key, value] : head.args) {
    if (key.empty())
      throw SurvError(ErrorCode::ConfigError,
                      "learner parameters must be named, got '" + value + "'");
    apply_learner_param(spec.learner, key, value);
  }

  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto call = detail::parse_stage(parts[i]);
    CompositorSpec stage;
    stage.kind = call.name;
    if (call.name == "distrcompositor") {
      for (const auto& [key, value] : call.args) {
        if (key == "estimator") {
          if (value != "kaplan" && value != "nelson")
            throw SurvError(ErrorCode::ConfigError, "estimator must be 'kaplan' or 'nelson'");
          stage.estimator = value;
        } else if (key == "form") {
          if (value != "ph" && value != "aft" && value != "po")
            throw SurvError(ErrorCode::InvalidForm, "form must be 'ph', 'aft' or 'po'");
          stage.form = value;
        } else {
          throw SurvError(ErrorCode::ConfigError,
                          "unknown distrcompositor argument '" + (key.empty() ? value : key) + "'");
        }
      }
    } else if (call.name == "crankcompositor") {
      for (const auto& [key, value] : call.args) {
        if (key == "summary" || key.empty()) {
          if (value != "mean" && value != "median")
            throw SurvError(ErrorCode::ConfigError, "summary must be 'mean' or 'median'");
          stage.summary = value;
        } else if (key == "overwrite_crank") {
          stage.overwrite_crank = detail::parse_bool(key, value);
        } else if (key == "set_response") {
          stage.set_response = detail::parse_bool(key, value);
        } else {
          throw SurvError(ErrorCode::ConfigError, "unknown crankcompositor argument '" + key + "'");
        }
      }
    } else {
      throw SurvError(ErrorCode::ConfigError, "unknown pipeline stage '" + call.name + "'");
    }
    spec.stages.push_back(stage);
  }
  return spec;
}

// Prediction types the fitted pipeline will populate, tracked through the
// stages; a stage whose input type can never be present is a config error.
inline std::set<PredictType> PipelineSpec::declared_types() const {
  std::set<PredictType> types;
  if (learner.id == "kaplan" || learner.id == "nelson")
    types = {PredictType::Distr, PredictType::Crank, PredictType::Response};
  else if (learner.id == "coxph")
    types = {PredictType::Crank, PredictType::Lp, PredictType::Distr};
  else
    types = {PredictType::Crank, PredictType::Lp, PredictType::Distr, PredictType::Response};

  for (const auto& stage : stages) {
    if (stage.kind == "distrcompositor") {
      if (!types.count(PredictType::Lp) && !types.count(PredictType::Crank))
        throw SurvError(ErrorCode::ConfigError,
                        "distrcompositor needs an lp or crank prediction in '" + descriptor + "'");
      types.insert(PredictType::Distr);
    } else {
      if (!types.count(PredictType::Distr))
        throw SurvError(ErrorCode::ConfigError,
                        "crankcompositor needs a distr prediction in '" + descriptor + "'");
      types.insert(PredictType::Crank);
      if (stage.set_response) types.insert(PredictType::Response);
    }
  }
  return types;
}

struct FittedPipeline {
  PipelineSpec spec;
  FittedModel model;
  // baseline per stage; only distrcompositor entries are populated
  std::vector<std::optional<FittedModel>> baselines;
};

inline FittedPipeline fit_pipeline(const PipelineSpec& spec, const SurvivalTask& task) {
  FittedPipeline fp;
  fp.spec = spec;
  fp.model = spec.learner.fit(task);
  fp.baselines.resize(spec.stages.size());
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    if (spec.stages[i].kind != "distrcompositor") continue;
    fp.baselines[i] = spec.stages[i].estimator == "kaplan" ? fit_kaplan_meier(task)
                                                           : fit_nelson_aalen(task);
  }
  return fp;
}

inline SurvivalPrediction predict_pipeline(const FittedPipeline& fp, const SurvivalTask& newdata) {
  SurvivalPrediction pred = predict(fp.model, newdata);
  for (std::size_t i = 0; i < fp.spec.stages.size(); ++i) {
    const auto& stage = fp.spec.stages[i];
    if (stage.kind == "distrcompositor")
      pred = distrcompositor(pred, *fp.baselines[i], stage.form);
    else
      pred = crankcompositor(pred, stage.summary, stage.overwrite_crank, stage.set_response);
  }
  return pred;
}

}  // namespace survkit
