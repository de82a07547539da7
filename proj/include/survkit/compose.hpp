#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <survkit/distribution.hpp>
#include <survkit/errors.hpp>
#include <survkit/model.hpp>
#include <survkit/prediction.hpp>

namespace survkit {

namespace detail {

inline Eigen::VectorXd lp_or_crank(const SurvivalPrediction& pred) {
  if (pred.lp) return *pred.lp;
  if (pred.crank) {
    std::cerr << "note: prediction has no lp; using crank as the linear predictor\n";
    return *pred.crank;
  }
  throw SurvError(ErrorCode::MissingLPandCrank, "prediction has neither lp nor crank");
}

}  // namespace detail

// Composes per-subject distr predictions from a linear predictor and a
// baseline curve S0 fitted on training data. Forms:
//   ph:  S(t|i) = S0(t)^exp(lp_i)
//   aft: S(t|i) = S0(t * exp(-lp_i)), step lookup on S0
//   po:  S(t|i) = S0(t) / (exp(lp_i) + (1 - exp(lp_i)) * S0(t))
// Other prediction types pass through untouched.
inline SurvivalPrediction distrcompositor(const SurvivalPrediction& pred,
                                          const FittedModel& baseline, const std::string& form) {
  if (form != "ph" && form != "aft" && form != "po")
    throw SurvError(ErrorCode::InvalidForm, "form must be 'ph', 'aft' or 'po'");
  const auto* curve = std::get_if<CurveParams>(&baseline.params);
  if (!curve)
    throw SurvError(ErrorCode::InvalidArgument, "baseline must be a kaplan or nelson model");
  if (curve->grid.empty()) throw SurvError(ErrorCode::GridEmpty, "baseline curve has an empty grid");
  const Eigen::VectorXd lp = detail::lp_or_crank(pred);

  const SurvivalDistribution s0(curve->grid, curve->surv);
  const std::size_t k = curve->grid.size();
  SurvivalPrediction out = pred;
  std::vector<SurvivalDistribution> distrs;
  distrs.reserve(static_cast<std::size_t>(pred.size()));
  for (int i = 0; i < pred.size(); ++i) {
    const double r = std::exp(lp[i]);
    std::vector<double> surv(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double s = curve->surv[j];
      if (form == "ph") {
        surv[j] = std::pow(s, r);
      } else if (form == "aft") {
        double u = curve->grid[j] * std::exp(-lp[i]);
        if (!std::isfinite(u)) u = std::numeric_limits<double>::max();
        surv[j] = s0.survival_at(u);
      } else {
        surv[j] = s / (r + (1.0 - r) * s);
      }
    }
    distrs.emplace_back(curve->grid, std::move(surv));
  }
  out.distr = std::move(distrs);
  out.validate();
  return out;
}

// Summarizes each distr into a crank (negated, so higher crank = higher risk)
// and optionally a response.
inline SurvivalPrediction crankcompositor(const SurvivalPrediction& pred,
                                          const std::string& summary, bool overwrite_crank = true,
                                          bool set_response = true) {
  if (summary != "mean" && summary != "median")
    throw SurvError(ErrorCode::InvalidArgument, "summary must be 'mean' or 'median'");
  if (!pred.distr) throw SurvError(ErrorCode::MissingDistr, "prediction has no distr");

  SurvivalPrediction out = pred;
  const int m = pred.size();
  Eigen::VectorXd s(m);
  for (int i = 0; i < m; ++i) {
    const auto& d = (*pred.distr)[static_cast<std::size_t>(i)];
    s[i] = summary == "mean" ? d.mean() : d.median().value;
  }
  if (set_response) out.response = s;
  if (overwrite_crank || !out.crank) out.crank = -s;
  out.validate();
  return out;
}

}  // namespace survkit
