#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <survkit/errors.hpp>

namespace survkit {

// Survival probabilities are clipped to at least this value before taking logs.
inline constexpr double kSurvClip = 1e-15;

struct MedianResult {
  double value;
  bool reached;  // false when the curve never crosses 0.5
};

// Right-continuous step survival curve on a finite grid:
// S(t) = 1 for t < grid[0], S(t) = surv[k] for grid[k] <= t < grid[k+1].
class SurvivalDistribution {
 public:
  SurvivalDistribution(std::vector<double> grid, std::vector<double> surv)
      : grid_(std::move(grid)), surv_(std::move(surv)) {
    if (grid_.empty())
      throw SurvError(ErrorCode::InvalidDistribution, "grid must contain at least one point");
    if (grid_.size() != surv_.size())
      throw SurvError(ErrorCode::InvalidDistribution, "grid and surv lengths differ");
    double prev_t = 0.0;
    double prev_s = 1.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (!std::isfinite(grid_[k]) || grid_[k] <= prev_t)
        throw SurvError(ErrorCode::InvalidDistribution,
                        "grid must be strictly increasing and positive");
      if (!(surv_[k] >= 0.0) || surv_[k] > prev_s + 1e-12 || surv_[k] > 1.0)
        throw SurvError(ErrorCode::InvalidDistribution,
                        "surv must be non-increasing within [0, 1]");
      // tolerate sub-ulp wobble from composed curves, but store a clean step
      surv_[k] = std::min(surv_[k], prev_s);
      prev_t = grid_[k];
      prev_s = surv_[k];
    }
  }

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& surv() const { return surv_; }
  std::size_t size() const { return grid_.size(); }

  // S(t): value at the largest grid point <= t, 1 before the first point.
  double survival_at(double t) const {
    if (!std::isfinite(t) || t < 0.0)
      throw SurvError(ErrorCode::NegativeTime, "time must be finite and >= 0");
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    if (it == grid_.begin()) return 1.0;
    return surv_[static_cast<std::size_t>(it - grid_.begin()) - 1];
  }

  // H(t) = -log(S(t)), with S clipped away from zero.
  double cumhazard_at(double t) const {
    return -std::log(std::max(survival_at(t), kSurvClip));
  }

  // Restricted mean survival time on [0, t_K], exact for the step function.
  double mean() const {
    double total = grid_[0];  // S = 1 on [0, t_1)
    for (std::size_t k = 1; k < grid_.size(); ++k)
      total += surv_[k - 1] * (grid_[k] - grid_[k - 1]);
    return total;
  }

  // Smallest grid point with S <= 0.5; the last grid point (flagged) otherwise.
  MedianResult median() const {
    for (std::size_t k = 0; k < grid_.size(); ++k)
      if (surv_[k] <= 0.5) return {grid_[k], true};
    return {grid_.back(), false};
  }

 private:
  std::vector<double> grid_;
  std::vector<double> surv_;
};

}  // namespace survkit
