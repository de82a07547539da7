#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include <survkit/coxph.hpp>
#include <survkit/errors.hpp>
#include <survkit/model.hpp>
#include <survkit/nonparametric.hpp>
#include <survkit/task.hpp>

namespace survkit {

struct WeibullOptions {
  int max_iter = 100;
  double tol = 1e-9;

  void validate() const {
    if (!(tol > 0.0)) throw SurvError(ErrorCode::InvalidArgument, "tol must be > 0");
    if (max_iter < 1) throw SurvError(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  }
};

namespace detail {

// Right-censored Weibull AFT log-likelihood in theta = (mu, gamma, log sigma)
// over centered features; z = (log t - mu - x'gamma)/sigma.
inline CoxEval weibull_eval(const Eigen::MatrixXd& xc, const Eigen::VectorXd& logt,
                            const Eigen::VectorXi& status, const Eigen::VectorXd& theta,
                            bool want_derivs) {
  const int n = static_cast<int>(xc.rows());
  const int p = static_cast<int>(xc.cols());
  const double mu = theta[0];
  const Eigen::VectorXd gamma = theta.segment(1, p);
  const double s = theta[p + 1];
  const double c = std::exp(-s);  // 1/sigma

  CoxEval out;
  if (want_derivs) {
    out.grad = Eigen::VectorXd::Zero(p + 2);
    out.hess = Eigen::MatrixXd::Zero(p + 2, p + 2);
  }

  Eigen::VectorXd z = (logt.array() - mu - (xc * gamma).array()) * c;
  double loglik = 0.0;
  double sum_a = 0.0, sum_b = 0.0, sum_az = 0.0, sum_abz = 0.0, sum_hss = 0.0;
  Eigen::VectorXd sum_ax = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sum_bx = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sum_abzx = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd sum_bxx;
  if (want_derivs) sum_bxx = Eigen::MatrixXd::Zero(p, p);

  for (int i = 0; i < n; ++i) {
    const double ez = std::exp(z[i]);
    const double b = -ez;
    double a;
    if (status[i] == 1) {
      loglik += z[i] - ez - s - logt[i];
      a = 1.0 - ez;
    } else {
      loglik += -ez;
      a = -ez;
    }
    if (want_derivs) {
      sum_a += a;
      sum_b += b;
      sum_az += a * z[i];
      sum_abz += a + b * z[i];
      sum_hss += b * z[i] * z[i] + a * z[i];
      sum_ax.noalias() += a * xc.row(i).transpose();
      sum_bx.noalias() += b * xc.row(i).transpose();
      sum_abzx.noalias() += (a + b * z[i]) * xc.row(i).transpose();
      sum_bxx.noalias() += b * (xc.row(i).transpose() * xc.row(i));
    }
  }
  if (!std::isfinite(loglik)) return out;
  out.loglik = loglik;

  if (want_derivs) {
    const double n_events = static_cast<double>(status.cast<double>().sum());
    out.grad[0] = -c * sum_a;
    out.grad.segment(1, p) = -c * sum_ax;
    out.grad[p + 1] = -sum_az - n_events;
    out.hess(0, 0) = c * c * sum_b;
    out.hess.block(0, 1, 1, p) = c * c * sum_bx.transpose();
    out.hess.block(1, 0, p, 1) = c * c * sum_bx;
    out.hess.block(1, 1, p, p) = c * c * sum_bxx;
    out.hess(0, p + 1) = c * sum_abz;
    out.hess(p + 1, 0) = c * sum_abz;
    out.hess.block(1, p + 1, p, 1) = c * sum_abzx;
    out.hess.block(p + 1, 1, 1, p) = c * sum_abzx.transpose();
    out.hess(p + 1, p + 1) = sum_hss;
  }
  return out;
}

}  // namespace detail

// Weibull accelerated failure time model: log T = mu + x'gamma + sigma * W,
// W standard minimum extreme value. Fitted by Newton-Raphson on
// (mu, gamma, log sigma); constant times are rejected up front (sigma is not
// identifiable) and scale collapse (sigma < 1e-8) aborts as nonconvergence
// since the likelihood is then degenerate.
inline FittedModel fit_weibull_aft(const SurvivalTask& task, const WeibullOptions& opt = {}) {
  opt.validate();
  if (task.n_events() < 1)
    throw SurvError(ErrorCode::NoEvents, "weibull_aft requires at least one event");

  const int p = task.p();
  const Eigen::VectorXd center =
      p > 0 ? Eigen::VectorXd(task.features().colwise().mean()) : Eigen::VectorXd(0);
  Eigen::MatrixXd xc = task.features().rowwise() - center.transpose();
  Eigen::VectorXd logt = task.time().array().log();

  // moment-matched start: W has mean -euler_gamma and sd pi/sqrt(6)
  constexpr double kEulerGamma = 0.57721566490153286;
  const double lt_mean = logt.mean();
  const double lt_sd = std::sqrt((logt.array() - lt_mean).square().sum() /
                                 std::max(1, task.n() - 1));
  if (!(lt_sd > 0.0))
    throw SurvError(ErrorCode::InvalidArgument,
                    "observed times are all identical; the weibull scale is not identifiable");
  const double sigma0 = std::max(lt_sd * std::sqrt(6.0) / M_PI, 1e-3);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 2);
  theta[0] = lt_mean + kEulerGamma * sigma0;
  theta[p + 1] = std::log(sigma0);

  auto eval = [&](const Eigen::VectorXd& th, bool derivs) {
    return detail::weibull_eval(xc, logt, task.status(), th, derivs);
  };
  auto check = [&](const Eigen::VectorXd& th) {
    if (std::exp(th[p + 1]) < 1e-8) {
      std::vector<double> last(th.data(), th.data() + th.size());
      throw NonconvergenceError("scale collapsed below 1e-8; times are likely degenerate",
                                std::move(last));
    }
  };
  theta = detail::newton_maximize(theta, eval, opt.max_iter, opt.tol,
                                  "observed information is singular; check for collinear features",
                                  check);
  check(theta);

  WeibullAftParams params;
  params.gamma = theta.segment(1, p);
  params.mu = theta[0] - (p > 0 ? center.dot(params.gamma) : 0.0);
  params.sigma = std::exp(theta[p + 1]);
  for (const auto& g : detail::group_times(task.time(), task.status()))
    if (g.events > 0) params.grid.push_back(g.time);

  FittedModel m;
  m.learner = "weibull_aft";
  m.feature_names = task.feature_names();
  m.types = {PredictType::Crank, PredictType::Lp, PredictType::Distr, PredictType::Response};
  m.params = std::move(params);
  m.validate();
  return m;
}

}  // namespace survkit
