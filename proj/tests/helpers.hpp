#pragma once

// Shared fixture builders for the test suite. Random data uses a raw
// std::mt19937_64 with hand-rolled conversions, independent of survkit::Rng.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <survkit/distribution.hpp>
#include <survkit/prediction.hpp>
#include <survkit/task.hpp>

#include "oracles.hpp"

namespace testhelp {

inline Eigen::VectorXd vecd(std::vector<double> v) {
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::VectorXi veci(std::vector<int> v) {
  return Eigen::Map<Eigen::VectorXi>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline std::vector<int> to_std(const Eigen::VectorXi& v) {
  return {v.data(), v.data() + v.size()};
}

template <typename Vec>
inline bool bitwise_equal(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// Outcome-only task (P = 0).
inline survkit::SurvivalTask outcome_task(std::vector<double> time, std::vector<int> status,
                                          std::string id = "t") {
  const auto n = static_cast<Eigen::Index>(time.size());
  return survkit::SurvivalTask(std::move(id), Eigen::MatrixXd(n, 0), {}, vecd(std::move(time)),
                               veci(std::move(status)));
}

inline survkit::SurvivalTask column_task(std::vector<double> x, std::vector<double> time,
                                         std::vector<int> status, std::string id = "t") {
  const auto n = static_cast<Eigen::Index>(time.size());
  Eigen::MatrixXd f(n, 1);
  f.col(0) = vecd(std::move(x));
  return survkit::SurvivalTask(std::move(id), std::move(f), {"x1"}, vecd(std::move(time)),
                               veci(std::move(status)));
}

// Prediction carrying only the test outcome; callers fill prediction types.
inline survkit::SurvivalPrediction outcome_pred(std::vector<double> time, std::vector<int> status) {
  survkit::SurvivalPrediction pred;
  pred.time = vecd(std::move(time));
  pred.status = veci(std::move(status));
  return pred;
}

inline oracle::Curve as_curve(const survkit::SurvivalDistribution& d) {
  oracle::Curve c;
  for (std::size_t i = 0; i < d.size(); ++i) c.emplace_back(d.grid()[i], d.surv()[i]);
  return c;
}

// Deterministic uniform/normal draws for fixture generation.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct RandomOutcome {
  std::vector<double> time;
  std::vector<int> status;
};

// Times drawn from a coarse positive lattice (so ties occur), censoring by a
// coin flip, at least one event guaranteed.
inline RandomOutcome random_outcome(TestRng& rng, int n, double censor_prob = 0.4,
                                    int lattice = 12) {
  RandomOutcome out;
  out.time.resize(static_cast<std::size_t>(n));
  out.status.resize(static_cast<std::size_t>(n));
  while (true) {
    int events = 0;
    for (int i = 0; i < n; ++i) {
      out.time[static_cast<std::size_t>(i)] = 0.5 * (1 + rng.below(lattice));
      out.status[static_cast<std::size_t>(i)] = rng.uniform01() < censor_prob ? 0 : 1;
      events += out.status[static_cast<std::size_t>(i)];
    }
    if (events > 0) return out;
  }
}

// Random valid step survival curve: grid of k points in (0, 10], surv built
// from descending sorted uniforms bounded below by floor_s.
inline survkit::SurvivalDistribution random_distribution(TestRng& rng, int max_points = 8,
                                                         double floor_s = 0.0) {
  const int k = 1 + rng.below(max_points);
  std::vector<double> grid;
  while (static_cast<int>(grid.size()) < k) {
    const double t = 0.25 * (1 + rng.below(40));
    bool dup = false;
    for (double g : grid) dup = dup || g == t;
    if (!dup) grid.push_back(t);
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> surv(static_cast<std::size_t>(k));
  for (auto& s : surv) s = rng.uniform(floor_s, 1.0);
  std::sort(surv.begin(), surv.end(), std::greater<>());
  return survkit::SurvivalDistribution(std::move(grid), std::move(surv));
}

}  // namespace testhelp
