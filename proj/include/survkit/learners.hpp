#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <survkit/coxph.hpp>
#include <survkit/distribution.hpp>
#include <survkit/errors.hpp>
#include <survkit/model.hpp>
#include <survkit/nonparametric.hpp>
#include <survkit/prediction.hpp>
#include <survkit/task.hpp>
#include <survkit/weibull_aft.hpp>

namespace survkit {

struct LearnerSpec {
  std::string id = "kaplan";  // kaplan | nelson | coxph | weibull_aft
  CoxOptions cox;
  WeibullOptions weibull;

  FittedModel fit(const SurvivalTask& task) const {
    if (id == "kaplan") return fit_kaplan_meier(task);
    if (id == "nelson") return fit_nelson_aalen(task);
    if (id == "coxph") return fit_coxph(task, cox);
    if (id == "weibull_aft") return fit_weibull_aft(task, weibull);
    throw SurvError(ErrorCode::InvalidArgument, "unknown learner '" + id + "'");
  }
};

namespace detail {

// Reorder newdata columns to the training layout; names must match exactly.
inline Eigen::MatrixXd align_features(const std::vector<std::string>& train_names,
                                      const Eigen::MatrixXd& x,
                                      const std::vector<std::string>& names) {
  if (names.size() != train_names.size())
    throw SurvError(ErrorCode::FeatureMismatch,
                    "newdata has " + std::to_string(names.size()) + " features, model expects " +
                        std::to_string(train_names.size()));
  std::unordered_map<std::string, int> pos;
  for (std::size_t j = 0; j < names.size(); ++j) pos[names[j]] = static_cast<int>(j);
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t j = 0; j < train_names.size(); ++j) {
    auto it = pos.find(train_names[j]);
    if (it == pos.end())
      throw SurvError(ErrorCode::FeatureMismatch, "newdata is missing feature '" + train_names[j] + "'");
    out.col(static_cast<Eigen::Index>(j)) = x.col(it->second);
  }
  return out;
}

}  // namespace detail

// Predict on new rows; carries the test outcome into the prediction so that
// measures can score it later. Populates exactly the model's declared types.
inline SurvivalPrediction predict(const FittedModel& model, const Eigen::MatrixXd& x,
                                  const std::vector<std::string>& names,
                                  const Eigen::VectorXd& time, const Eigen::VectorXi& status) {
  const int m = static_cast<int>(x.rows());
  if (m < 1) throw SurvError(ErrorCode::EmptyNewdata, "newdata has no rows");
  if (time.size() != m || status.size() != m)
    throw SurvError(ErrorCode::LengthMismatch, "newdata outcome length does not match rows");

  SurvivalPrediction pred;
  pred.time = time;
  pred.status = status;

  if (const auto* curve = std::get_if<CurveParams>(&model.params)) {
    SurvivalDistribution distr(curve->grid, curve->surv);
    const double mean = distr.mean();
    pred.distr = std::vector<SurvivalDistribution>(static_cast<std::size_t>(m), distr);
    pred.crank = Eigen::VectorXd::Zero(m);
    pred.response = Eigen::VectorXd::Constant(m, mean);
    pred.validate();
    return pred;
  }

  Eigen::MatrixXd xa = detail::align_features(model.feature_names, x, names);
  if (!xa.allFinite())
    throw SurvError(ErrorCode::MissingValue, "newdata features contain missing or non-finite values");

  if (const auto* cox = std::get_if<CoxParams>(&model.params)) {
    Eigen::VectorXd lp = (xa.rowwise() - cox->center.transpose()) * cox->beta;
    pred.lp = lp;
    pred.crank = lp;
    const std::size_t k = cox->baseline_times.size();
    std::vector<SurvivalDistribution> distrs;
    distrs.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double r = std::exp(lp[i]);
      std::vector<double> surv(k);
      for (std::size_t j = 0; j < k; ++j) surv[j] = std::exp(-cox->baseline_cumhaz[j] * r);
      distrs.emplace_back(cox->baseline_times, std::move(surv));
    }
    pred.distr = std::move(distrs);
    pred.validate();
    return pred;
  }

  const auto& wb = std::get<WeibullAftParams>(model.params);
  Eigen::VectorXd lp = xa.cols() > 0 ? Eigen::VectorXd(xa * wb.gamma) : Eigen::VectorXd::Zero(m);
  pred.lp = lp;
  pred.crank = -lp;
  pred.response = (lp.array() + wb.mu).exp() * std::tgamma(1.0 + wb.sigma);
  const std::size_t k = wb.grid.size();
  std::vector<SurvivalDistribution> distrs;
  distrs.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::vector<double> surv(k);
    for (std::size_t j = 0; j < k; ++j)
      surv[j] = std::exp(-std::exp((std::log(wb.grid[j]) - wb.mu - lp[i]) / wb.sigma));
    distrs.emplace_back(wb.grid, std::move(surv));
  }
  pred.distr = std::move(distrs);
  pred.validate();
  return pred;
}

inline SurvivalPrediction predict(const FittedModel& model, const SurvivalTask& newdata) {
  return predict(model, newdata.features(), newdata.feature_names(), newdata.time(),
                 newdata.status());
}

}  // namespace survkit
