#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <survkit/coxph.hpp>
#include <survkit/distribution.hpp>
#include <survkit/errors.hpp>
#include <survkit/nonparametric.hpp>
#include <survkit/prediction.hpp>
#include <survkit/task.hpp>

namespace survkit {

struct MeasureSpec {
  std::string id = "harrell_c";
  std::optional<double> tau;  // cutoff; defaults to max observed test time
  double eps = 1e-15;         // probability clip for log scores

  void validate() const;
};

struct MeasureInfo {
  PredictType required;
  std::optional<bool> maximize;  // unset: not usable as a tuning objective
};

inline const std::map<std::string, MeasureInfo>& measure_registry() {
  static const std::map<std::string, MeasureInfo> reg = {
      {"harrell_c", {PredictType::Crank, true}},
      {"uno_c", {PredictType::Crank, true}},
      {"graf", {PredictType::Distr, false}},
      {"intlogloss", {PredictType::Distr, false}},
      {"schmid", {PredictType::Distr, false}},
      {"houwelingen_beta", {PredictType::Lp, std::nullopt}},
      {"calib_curve", {PredictType::Distr, std::nullopt}},
  };
  return reg;
}

inline void MeasureSpec::validate() const {
  if (measure_registry().find(id) == measure_registry().end())
    throw SurvError(ErrorCode::ConfigError, "unknown measure '" + id + "'");
  if (tau && !(*tau > 0.0)) throw SurvError(ErrorCode::InvalidArgument, "tau must be > 0");
  if (!(eps > 0.0) || eps > 1e-6)
    throw SurvError(ErrorCode::InvalidArgument, "eps must lie in (0, 1e-6]");
}

// Kaplan-Meier estimate of the censoring distribution (status flipped), with
// the left-continuous evaluation used in IPCW weights. Values below 1e-4 are
// floored before any division; floor hits are reported to the caller.
class CensoringEstimate {
 public:
  static constexpr double kFloor = 1e-4;

  CensoringEstimate(const Eigen::VectorXd& time, const Eigen::VectorXi& status) {
    Eigen::VectorXi flipped = 1 - status.array();
    curve_ = kaplan_meier_curve(time, flipped);
  }

  // right-continuous G(t)
  double at(double t) const { return value(std::upper_bound(curve_.grid.begin(), curve_.grid.end(), t)); }
  // left-continuous G(t-)
  double before(double t) const {
    return value(std::lower_bound(curve_.grid.begin(), curve_.grid.end(), t));
  }

  double floored_at(double t, bool& hit) const { return floor_of(at(t), hit); }
  double floored_before(double t, bool& hit) const { return floor_of(before(t), hit); }

 private:
  double value(std::vector<double>::const_iterator upper) const {
    if (upper == curve_.grid.begin()) return 1.0;
    return curve_.surv[static_cast<std::size_t>(upper - curve_.grid.begin()) - 1];
  }
  static double floor_of(double g, bool& hit) {
    hit = g < kFloor;
    return hit ? kFloor : g;
  }

  CurveParams curve_;
};

namespace detail {

// Comparable pairs: (t_i < t_j, event i) and the event-first tie convention
// (t_i = t_j, event i, censored j).
inline bool comparable_pair(double ti, int di, double tj, int dj) {
  return di == 1 && (ti < tj || (ti == tj && dj == 0));
}

inline const Eigen::VectorXd& require_crank(const SurvivalPrediction& pred) {
  if (!pred.crank) throw SurvError(ErrorCode::MissingCrank, "prediction has no crank");
  return *pred.crank;
}

inline const std::vector<SurvivalDistribution>& require_distr(const SurvivalPrediction& pred) {
  if (!pred.distr) throw SurvError(ErrorCode::MissingDistr, "prediction has no distr");
  return *pred.distr;
}

// Unique event times <= tau, ascending.
inline std::vector<double> event_grid(const SurvivalPrediction& pred, double tau) {
  std::vector<double> g;
  for (int i = 0; i < pred.size(); ++i)
    if (pred.status[i] == 1 && pred.time[i] <= tau) g.push_back(pred.time[i]);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

enum class ScoreKind { Graf, LogLoss, Schmid };

// Pointwise IPCW score at t, averaged over subjects. Terms are summed in
// sorted order so the result is invariant under subject permutation.
inline double pointwise_score(const SurvivalPrediction& pred,
                              const std::vector<SurvivalDistribution>& distr,
                              const CensoringEstimate& cens, double t, ScoreKind kind, double eps) {
  const int m = pred.size();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(m));
  bool hit = false;
  const double g_t = cens.floored_at(t, hit);
  for (int i = 0; i < m; ++i) {
    double s = distr[static_cast<std::size_t>(i)].survival_at(t);
    if (kind == ScoreKind::LogLoss) s = std::clamp(s, eps, 1.0 - eps);
    if (pred.status[i] == 1 && pred.time[i] <= t) {
      const double g = cens.floored_before(pred.time[i], hit);
      switch (kind) {
        case ScoreKind::Graf: terms.push_back(s * s / g); break;
        case ScoreKind::LogLoss: terms.push_back(-std::log(1.0 - s) / g); break;
        case ScoreKind::Schmid: terms.push_back(s / g); break;
      }
    } else if (pred.time[i] > t) {
      const double f = 1.0 - s;
      switch (kind) {
        case ScoreKind::Graf: terms.push_back(f * f / g_t); break;
        case ScoreKind::LogLoss: terms.push_back(-std::log(s) / g_t); break;
        case ScoreKind::Schmid: terms.push_back(f / g_t); break;
      }
    }
  }
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double v : terms) total += v;
  return total / static_cast<double>(m);
}

// Trapezoid integral over the grid, normalized by the grid range; a
// single-point grid degenerates to the score at that point.
inline double integrate_score(const SurvivalPrediction& pred, ScoreKind kind,
                              const MeasureSpec& spec) {
  require_distr(pred);
  const double tau = spec.tau ? *spec.tau : pred.time.maxCoeff();
  const std::vector<double> grid = event_grid(pred, tau);
  if (grid.empty())
    throw SurvError(ErrorCode::EmptyGrid, "no test event times at or below tau");
  const CensoringEstimate cens(pred.time, pred.status);
  std::vector<double> bs(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    bs[k] = pointwise_score(pred, *pred.distr, cens, grid[k], kind, spec.eps);
  if (grid.size() == 1) return bs[0];
  double area = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    area += 0.5 * (bs[k] + bs[k - 1]) * (grid[k] - grid[k - 1]);
  return area / (grid.back() - grid.front());
}

}  // namespace detail

inline double harrell_c(const SurvivalPrediction& pred) {
  const Eigen::VectorXd& crank = detail::require_crank(pred);
  const int m = pred.size();
  long long comparable = 0;
  double credit = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j || !detail::comparable_pair(pred.time[i], pred.status[i], pred.time[j], pred.status[j]))
        continue;
      ++comparable;
      if (crank[i] > crank[j])
        credit += 1.0;
      else if (crank[i] == crank[j])
        credit += 0.5;
    }
  if (comparable == 0)
    throw SurvError(ErrorCode::NoComparablePairs, "no comparable pairs in test outcome");
  return credit / static_cast<double>(comparable);
}

inline double uno_c(const SurvivalPrediction& pred, const MeasureSpec& spec = {.id = "uno_c"}) {
  const Eigen::VectorXd& crank = detail::require_crank(pred);
  const double tau = spec.tau ? *spec.tau : pred.time.maxCoeff();
  const CensoringEstimate cens(pred.time, pred.status);
  const int m = pred.size();
  long long pairs = 0, floored = 0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!(pred.time[i] < tau) || pred.status[i] != 1) continue;
    bool hit = false;
    const double g = cens.floored_before(pred.time[i], hit);
    const double w = 1.0 / (g * g);
    for (int j = 0; j < m; ++j) {
      if (i == j || !detail::comparable_pair(pred.time[i], 1, pred.time[j], pred.status[j]))
        continue;
      ++pairs;
      if (hit) ++floored;
      den += w;
      if (crank[i] > crank[j])
        num += w;
      else if (crank[i] == crank[j])
        num += 0.5 * w;
    }
  }
  if (pairs == 0)
    throw SurvError(ErrorCode::NoComparablePairs, "no comparable pairs below tau");
  if (10 * floored > pairs)
    throw SurvError(ErrorCode::DegenerateCensoring,
                    "censoring weights floored for " + std::to_string(floored) + " of " +
                        std::to_string(pairs) + " pairs");
  return num / den;
}

inline double graf_score(const SurvivalPrediction& pred, const MeasureSpec& spec = {.id = "graf"}) {
  return detail::integrate_score(pred, detail::ScoreKind::Graf, spec);
}

inline double int_logloss(const SurvivalPrediction& pred,
                          const MeasureSpec& spec = {.id = "intlogloss"}) {
  return detail::integrate_score(pred, detail::ScoreKind::LogLoss, spec);
}

inline double schmid_score(const SurvivalPrediction& pred,
                           const MeasureSpec& spec = {.id = "schmid"}) {
  return detail::integrate_score(pred, detail::ScoreKind::Schmid, spec);
}

// Calibration slope: Cox coefficient of lp refit on the test outcome.
inline double houwelingen_beta(const SurvivalPrediction& pred) {
  if (!pred.lp) throw SurvError(ErrorCode::MissingLP, "prediction has no lp");
  if (pred.status.sum() < 1)
    throw SurvError(ErrorCode::NoEvents, "test outcome has no events");
  const Eigen::VectorXd& lp = *pred.lp;
  if (lp.maxCoeff() == lp.minCoeff())
    throw SurvError(ErrorCode::DegenerateLP, "lp has zero variance");
  SurvivalTask t("calibration", lp, {"lp"}, pred.time, pred.status);
  CoxOptions opt;
  opt.ties = "breslow";
  return std::get<CoxParams>(fit_coxph(t, opt).params).beta[0];
}

struct CalibCurve {
  std::vector<double> grid;
  std::vector<double> mean_pred_surv;
  std::vector<double> km_surv;
};

// Mean predicted survival vs Kaplan-Meier of the test outcome, both evaluated
// on the union of their step supports.
inline CalibCurve calib_curve(const SurvivalPrediction& pred) {
  const auto& distr = detail::require_distr(pred);
  const CurveParams km = kaplan_meier_curve(pred.time, pred.status);
  std::vector<double> grid = km.grid;
  for (const auto& d : distr) grid.insert(grid.end(), d.grid().begin(), d.grid().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  SurvivalDistribution km_distr(km.grid, km.surv);
  CalibCurve out;
  out.grid = grid;
  out.mean_pred_surv.reserve(grid.size());
  out.km_surv.reserve(grid.size());
  for (double t : grid) {
    double s = 0.0;
    for (const auto& d : distr) s += d.survival_at(t);
    out.mean_pred_surv.push_back(s / static_cast<double>(distr.size()));
    out.km_surv.push_back(km_distr.survival_at(t));
  }
  return out;
}

// Scalar measure dispatch used by benchmarking and tuning.
inline double evaluate_measure(const MeasureSpec& spec, const SurvivalPrediction& pred) {
  spec.validate();
  if (spec.id == "harrell_c") return harrell_c(pred);
  if (spec.id == "uno_c") return uno_c(pred, spec);
  if (spec.id == "graf") return graf_score(pred, spec);
  if (spec.id == "intlogloss") return int_logloss(pred, spec);
  if (spec.id == "schmid") return schmid_score(pred, spec);
  if (spec.id == "houwelingen_beta") return houwelingen_beta(pred);
  throw SurvError(ErrorCode::ConfigError, "measure '" + spec.id + "' does not produce a scalar score");
}

}  // namespace survkit
