#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include <survkit/distribution.hpp>
#include <survkit/errors.hpp>

namespace survkit {

enum class PredictType { Response, Distr, Crank, Lp };

inline const char* predict_type_name(PredictType t) {
  switch (t) {
    case PredictType::Response: return "response";
    case PredictType::Distr: return "distr";
    case PredictType::Crank: return "crank";
    case PredictType::Lp: return "lp";
  }
  return "?";
}

inline PredictType predict_type_from(const std::string& s) {
  if (s == "response") return PredictType::Response;
  if (s == "distr") return PredictType::Distr;
  if (s == "crank") return PredictType::Crank;
  if (s == "lp") return PredictType::Lp;
  throw SurvError(ErrorCode::InvalidArgument, "unknown prediction type '" + s + "'");
}

// Per-subject bundle of predictions plus the true test outcome. Any subset of
// the four types may be present; a present type covers every subject.
// crank convention everywhere: higher crank = higher risk.
struct SurvivalPrediction {
  Eigen::VectorXd time;    // observed test times
  Eigen::VectorXi status;  // 1 = event, 0 = censored

  std::optional<Eigen::VectorXd> response;
  std::optional<Eigen::VectorXd> crank;
  std::optional<Eigen::VectorXd> lp;
  std::optional<std::vector<SurvivalDistribution>> distr;

  int size() const { return static_cast<int>(time.size()); }

  bool has(PredictType t) const {
    switch (t) {
      case PredictType::Response: return response.has_value();
      case PredictType::Distr: return distr.has_value();
      case PredictType::Crank: return crank.has_value();
      case PredictType::Lp: return lp.has_value();
    }
    return false;
  }

  std::vector<PredictType> present_types() const {
    std::vector<PredictType> out;
    for (auto t : {PredictType::Response, PredictType::Distr, PredictType::Crank, PredictType::Lp})
      if (has(t)) out.push_back(t);
    return out;
  }

  void validate() const {
    const Eigen::Index m = time.size();
    if (m < 1) throw SurvError(ErrorCode::EmptyNewdata, "prediction must cover at least one subject");
    if (status.size() != m)
      throw SurvError(ErrorCode::LengthMismatch, "prediction time/status lengths differ");
    if (response && response->size() != m)
      throw SurvError(ErrorCode::LengthMismatch, "response length differs from subject count");
    if (crank && crank->size() != m)
      throw SurvError(ErrorCode::LengthMismatch, "crank length differs from subject count");
    if (lp && lp->size() != m)
      throw SurvError(ErrorCode::LengthMismatch, "lp length differs from subject count");
    if (distr && static_cast<Eigen::Index>(distr->size()) != m)
      throw SurvError(ErrorCode::LengthMismatch, "distr count differs from subject count");
    if (response)
      for (Eigen::Index i = 0; i < m; ++i)
        if (!((*response)[i] > 0.0))
          throw SurvError(ErrorCode::InvalidArgument, "response must be > 0");
  }
};

}  // namespace survkit
