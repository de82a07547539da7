#pragma once

#include <Eigen/Core>
#include <string>
#include <variant>
#include <vector>

#include <survkit/errors.hpp>
#include <survkit/prediction.hpp>

namespace survkit {

// Curve estimate shared by the Kaplan-Meier and Nelson-Aalen learners.
struct CurveParams {
  std::vector<double> grid;  // unique event times (or [max time] when no events)
  std::vector<double> surv;
};

struct CoxParams {
  Eigen::VectorXd beta;
  Eigen::VectorXd center;  // training feature means; lp = (x - center)' beta
  std::vector<double> baseline_times;
  std::vector<double> baseline_cumhaz;  // Breslow H0 at baseline_times
  std::string ties = "efron";
};

struct WeibullAftParams {
  double mu = 0.0;
  Eigen::VectorXd gamma;
  double sigma = 1.0;
  std::vector<double> grid;  // unique training event times, distr support
};

struct FittedModel {
  std::string learner;  // kaplan | nelson | coxph | weibull_aft
  std::vector<std::string> feature_names;
  std::vector<PredictType> types;  // declared prediction types
  std::variant<CurveParams, CoxParams, WeibullAftParams> params;

  bool declares(PredictType t) const {
    for (auto x : types)
      if (x == t) return true;
    return false;
  }

  void validate() const {
    if (const auto* cox = std::get_if<CoxParams>(&params)) {
      if (cox->beta.size() != static_cast<Eigen::Index>(feature_names.size()))
        throw SurvError(ErrorCode::LengthMismatch, "coefficient/feature name count mismatch");
      if (cox->center.size() != cox->beta.size())
        throw SurvError(ErrorCode::LengthMismatch, "centering vector length mismatch");
      if (cox->baseline_times.size() != cox->baseline_cumhaz.size())
        throw SurvError(ErrorCode::LengthMismatch, "baseline hazard arrays differ in length");
      double prev = 0.0;
      for (double h : cox->baseline_cumhaz) {
        if (h < prev) throw SurvError(ErrorCode::InvalidArgument, "baseline cumhazard must be non-decreasing");
        prev = h;
      }
    } else if (const auto* wb = std::get_if<WeibullAftParams>(&params)) {
      if (!(wb->sigma > 0.0)) throw SurvError(ErrorCode::InvalidArgument, "sigma must be > 0");
      if (wb->gamma.size() != static_cast<Eigen::Index>(feature_names.size()))
        throw SurvError(ErrorCode::LengthMismatch, "coefficient/feature name count mismatch");
    } else if (const auto* cv = std::get_if<CurveParams>(&params)) {
      if (cv->grid.size() != cv->surv.size() || cv->grid.empty())
        throw SurvError(ErrorCode::InvalidArgument, "curve arrays empty or mismatched");
    }
  }
};

}  // namespace survkit
