#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <survkit/errors.hpp>
#include <survkit/rng.hpp>
#include <survkit/task.hpp>

namespace survkit {

struct SimSpec {
  int n = 100;
  int p = 0;
  Eigen::VectorXd beta;            // length p
  double shape = 1.0;              // baseline Weibull shape
  double rate = 1.0;               // baseline Weibull rate
  double cens_rate = 0.0;          // exponential censoring rate; 0 = none
  std::optional<double> cens_time; // administrative cutoff
  std::uint64_t seed = 0;
  std::string id = "sim";

  void validate() const {
    if (n < 1) throw SurvError(ErrorCode::InvalidArgument, "n must be >= 1");
    if (p < 0) throw SurvError(ErrorCode::InvalidArgument, "p must be >= 0");
    if (beta.size() != p)
      throw SurvError(ErrorCode::LengthMismatch, "beta length (" + std::to_string(beta.size()) +
                                                     ") does not match p (" + std::to_string(p) + ")");
    if (!(shape > 0.0) || !(rate > 0.0))
      throw SurvError(ErrorCode::InvalidArgument, "shape and rate must be > 0");
    if (cens_rate < 0.0) throw SurvError(ErrorCode::InvalidArgument, "cens_rate must be >= 0");
    if (cens_time && !(*cens_time > 0.0))
      throw SurvError(ErrorCode::InvalidArgument, "cens_time must be > 0");
  }
};

// Weibull-baseline proportional hazards generator by inverse transform:
// T = (-log U / (rate * exp(x'beta)))^(1/shape), standard normal covariates,
// censoring independent of x. The per-subject draw order (covariates, U,
// censoring) is fixed, so output is bit-identical for a given seed.
inline SurvivalTask simulate(const SimSpec& spec) {
  spec.validate();
  Rng rng(splitmix64(spec.seed));

  Eigen::MatrixXd x(spec.n, spec.p);
  Eigen::VectorXd time(spec.n);
  Eigen::VectorXi status(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.p; ++j) x(i, j) = rng.normal();
    const double lp = spec.p > 0 ? x.row(i).dot(spec.beta) : 0.0;
    const double u = rng.uniform01();
    const double t = std::pow(-std::log(u) / (spec.rate * std::exp(lp)), 1.0 / spec.shape);
    double c = std::numeric_limits<double>::infinity();
    if (spec.cens_rate > 0.0) c = rng.exponential(spec.cens_rate);
    if (spec.cens_time) c = std::min(c, *spec.cens_time);
    time[i] = std::min(t, c);
    status[i] = t <= c ? 1 : 0;
  }

  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(spec.p));
  for (int j = 0; j < spec.p; ++j) names.push_back("x" + std::to_string(j + 1));
  return SurvivalTask(spec.id, std::move(x), std::move(names), std::move(time), std::move(status));
}

}  // namespace survkit
