#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <survkit/csv.hpp>
#include <survkit/distribution.hpp>
#include <survkit/errors.hpp>
#include <survkit/model.hpp>
#include <survkit/prediction.hpp>

namespace survkit {

namespace detail {

inline nlohmann::json to_array(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline nlohmann::json to_array(const Eigen::VectorXi& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Eigen::VectorXd vecd_from(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a.at(i).get<double>();
  return v;
}

inline Eigen::VectorXi veci_from(const nlohmann::json& a) {
  Eigen::VectorXi v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a.at(i).get<int>();
  return v;
}

}  // namespace detail

inline nlohmann::json distribution_to_json(const SurvivalDistribution& d) {
  return {{"grid", d.grid()}, {"surv", d.surv()}};
}

inline SurvivalDistribution distribution_from_json(const nlohmann::json& j) {
  return SurvivalDistribution(j.at("grid").get<std::vector<double>>(),
                              j.at("surv").get<std::vector<double>>());
}

inline nlohmann::json prediction_to_json(const SurvivalPrediction& pred) {
  nlohmann::json j;
  j["time"] = detail::to_array(pred.time);
  j["status"] = detail::to_array(pred.status);
  nlohmann::json types = nlohmann::json::array();
  for (PredictType t : pred.present_types()) types.push_back(predict_type_name(t));
  j["types"] = types;
  if (pred.response) j["response"] = detail::to_array(*pred.response);
  if (pred.crank) j["crank"] = detail::to_array(*pred.crank);
  if (pred.lp) j["lp"] = detail::to_array(*pred.lp);
  if (pred.distr) {
    nlohmann::json distrs = nlohmann::json::array();
    for (const auto& d : *pred.distr) distrs.push_back(distribution_to_json(d));
    j["distr"] = distrs;
  }
  return j;
}

inline SurvivalPrediction prediction_from_json(const nlohmann::json& j) {
  SurvivalPrediction pred;
  pred.time = detail::vecd_from(j.at("time"));
  pred.status = detail::veci_from(j.at("status"));
  if (j.contains("response")) pred.response = detail::vecd_from(j.at("response"));
  if (j.contains("crank")) pred.crank = detail::vecd_from(j.at("crank"));
  if (j.contains("lp")) pred.lp = detail::vecd_from(j.at("lp"));
  if (j.contains("distr")) {
    std::vector<SurvivalDistribution> distrs;
    for (const auto& d : j.at("distr")) distrs.push_back(distribution_from_json(d));
    pred.distr = std::move(distrs);
  }
  pred.validate();
  return pred;
}

inline nlohmann::json manifest_to_json(const EncodingManifest& m) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : m.columns) {
    nlohmann::json col = {{"name", c.name}, {"kind", c.numeric ? "numeric" : "onehot"}};
    if (!c.numeric) col["levels"] = c.levels;
    cols.push_back(std::move(col));
  }
  return {{"time_col", m.time_col}, {"event_col", m.event_col}, {"columns", cols}};
}

inline EncodingManifest manifest_from_json(const nlohmann::json& j) {
  EncodingManifest m;
  m.time_col = j.at("time_col").get<std::string>();
  m.event_col = j.at("event_col").get<std::string>();
  for (const auto& col : j.at("columns")) {
    ColumnEncoding enc;
    enc.name = col.at("name").get<std::string>();
    enc.numeric = col.at("kind").get<std::string>() == "numeric";
    if (!enc.numeric) enc.levels = col.at("levels").get<std::vector<std::string>>();
    m.columns.push_back(std::move(enc));
  }
  return m;
}

struct SavedModel {
  FittedModel model;
  std::optional<EncodingManifest> encoding;
};

inline nlohmann::json model_to_json(const FittedModel& model,
                                    const std::optional<EncodingManifest>& encoding = {}) {
  nlohmann::json j;
  j["learner"] = model.learner;
  j["feature_names"] = model.feature_names;
  nlohmann::json types = nlohmann::json::array();
  for (PredictType t : model.types) types.push_back(predict_type_name(t));
  j["types"] = types;

  nlohmann::json params;
  if (const auto* curve = std::get_if<CurveParams>(&model.params)) {
    params = {{"grid", curve->grid}, {"surv", curve->surv}};
  } else if (const auto* cox = std::get_if<CoxParams>(&model.params)) {
    params = {{"beta", detail::to_array(cox->beta)},
              {"center", detail::to_array(cox->center)},
              {"baseline_times", cox->baseline_times},
              {"baseline_cumhaz", cox->baseline_cumhaz},
              {"ties", cox->ties}};
  } else {
    const auto& wb = std::get<WeibullAftParams>(model.params);
    params = {{"mu", wb.mu},
              {"gamma", detail::to_array(wb.gamma)},
              {"sigma", wb.sigma},
              {"grid", wb.grid}};
  }
  j["params"] = std::move(params);
  if (encoding) j["encoding"] = manifest_to_json(*encoding);
  return j;
}

inline SavedModel model_from_json(const nlohmann::json& j) {
  SavedModel saved;
  FittedModel& m = saved.model;
  m.learner = j.at("learner").get<std::string>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& t : j.at("types")) m.types.push_back(predict_type_from(t.get<std::string>()));

  const nlohmann::json& params = j.at("params");
  if (m.learner == "kaplan" || m.learner == "nelson") {
    CurveParams curve;
    curve.grid = params.at("grid").get<std::vector<double>>();
    curve.surv = params.at("surv").get<std::vector<double>>();
    m.params = std::move(curve);
  } else if (m.learner == "coxph") {
    CoxParams cox;
    cox.beta = detail::vecd_from(params.at("beta"));
    cox.center = detail::vecd_from(params.at("center"));
    cox.baseline_times = params.at("baseline_times").get<std::vector<double>>();
    cox.baseline_cumhaz = params.at("baseline_cumhaz").get<std::vector<double>>();
    cox.ties = params.at("ties").get<std::string>();
    m.params = std::move(cox);
  } else if (m.learner == "weibull_aft") {
    WeibullAftParams wb;
    wb.mu = params.at("mu").get<double>();
    wb.gamma = detail::vecd_from(params.at("gamma"));
    wb.sigma = params.at("sigma").get<double>();
    wb.grid = params.at("grid").get<std::vector<double>>();
    m.params = std::move(wb);
  } else {
    throw SurvError(ErrorCode::ConfigError, "unknown learner '" + m.learner + "' in model file");
  }
  m.validate();
  if (j.contains("encoding")) saved.encoding = manifest_from_json(j.at("encoding"));
  return saved;
}

inline nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SurvError(ErrorCode::ConfigError, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SurvError(ErrorCode::ConfigError, "cannot parse JSON in '" + path + "': " + e.what());
  }
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SurvError(ErrorCode::ConfigError, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace survkit
