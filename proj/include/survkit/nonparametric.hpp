#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <survkit/errors.hpp>
#include <survkit/model.hpp>
#include <survkit/task.hpp>

namespace survkit {

namespace detail {

struct TimeGroup {
  double time;
  int at_risk;
  int events;
  int censored;
};

// Distinct observed times in ascending order with at-risk/event/censor counts.
// At-risk at t counts subjects with observed time >= t.
inline std::vector<TimeGroup> group_times(const Eigen::VectorXd& time, const Eigen::VectorXi& status) {
  const int n = static_cast<int>(time.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return time[a] < time[b]; });

  std::vector<TimeGroup> groups;
  int i = 0;
  while (i < n) {
    const double t = time[order[static_cast<std::size_t>(i)]];
    TimeGroup g{t, n - i, 0, 0};
    while (i < n && time[order[static_cast<std::size_t>(i)]] == t) {
      if (status[order[static_cast<std::size_t>(i)]] == 1)
        ++g.events;
      else
        ++g.censored;
      ++i;
    }
    groups.push_back(g);
  }
  return groups;
}

}  // namespace detail

// Product-limit curve on the unique event times. Within a censoring-free run of
// event times the product telescopes, so the survival value is computed as a
// single ratio from the run's anchor; with no censoring at all this makes
// S(t) identical to the empirical survivor fraction #{time > t}/N.
inline CurveParams kaplan_meier_curve(const Eigen::VectorXd& time, const Eigen::VectorXi& status) {
  auto groups = detail::group_times(time, status);

  CurveParams curve;
  double s = 1.0;
  double anchor_s = 1.0;
  int anchor_n = 0;
  int block_events = 0;
  bool need_anchor = true;
  for (const auto& g : groups) {
    if (g.events > 0) {
      if (need_anchor) {
        anchor_s = s;
        anchor_n = g.at_risk;
        block_events = 0;
        need_anchor = false;
      }
      block_events += g.events;
      s = anchor_s * (static_cast<double>(anchor_n - block_events) / static_cast<double>(anchor_n));
      curve.grid.push_back(g.time);
      curve.surv.push_back(s);
    }
    if (g.censored > 0) need_anchor = true;
  }
  if (curve.grid.empty()) {
    // no events: flat curve, anchored at the largest observed time
    curve.grid.push_back(groups.back().time);
    curve.surv.push_back(1.0);
  }
  return curve;
}

// Nelson-Aalen cumulative hazard, exported as S = exp(-H) on the event grid.
inline CurveParams nelson_aalen_curve(const Eigen::VectorXd& time, const Eigen::VectorXi& status) {
  auto groups = detail::group_times(time, status);

  CurveParams curve;
  double cumhaz = 0.0;
  for (const auto& g : groups) {
    if (g.events > 0) {
      cumhaz += static_cast<double>(g.events) / static_cast<double>(g.at_risk);
      curve.grid.push_back(g.time);
      curve.surv.push_back(std::exp(-cumhaz));
    }
  }
  if (curve.grid.empty()) {
    curve.grid.push_back(groups.back().time);
    curve.surv.push_back(1.0);
  }
  return curve;
}

inline FittedModel fit_kaplan_meier(const SurvivalTask& task) {
  FittedModel m;
  m.learner = "kaplan";
  m.feature_names = task.feature_names();
  m.types = {PredictType::Distr, PredictType::Crank, PredictType::Response};
  m.params = kaplan_meier_curve(task.time(), task.status());
  return m;
}

inline FittedModel fit_nelson_aalen(const SurvivalTask& task) {
  FittedModel m;
  m.learner = "nelson";
  m.feature_names = task.feature_names();
  m.types = {PredictType::Distr, PredictType::Crank, PredictType::Response};
  m.params = nelson_aalen_curve(task.time(), task.status());
  return m;
}

}  // namespace survkit
