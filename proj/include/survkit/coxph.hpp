#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <survkit/errors.hpp>
#include <survkit/model.hpp>
#include <survkit/task.hpp>

namespace survkit {

struct CoxOptions {
  std::string ties = "efron";  // efron | breslow
  int max_iter = 50;
  double tol = 1e-9;
  double ridge = 0.0;  // L2 penalty: loglik - ridge/2 * |beta|^2

  void validate() const {
    if (ties != "efron" && ties != "breslow")
      throw SurvError(ErrorCode::InvalidArgument, "ties must be 'efron' or 'breslow'");
    if (!(tol > 0.0)) throw SurvError(ErrorCode::InvalidArgument, "tol must be > 0");
    if (max_iter < 1) throw SurvError(ErrorCode::InvalidArgument, "max_iter must be >= 1");
    if (ridge < 0.0) throw SurvError(ErrorCode::InvalidArgument, "ridge must be >= 0");
  }
};

namespace detail {

// Tie groups in ascending time order, over pre-sorted row indices.
struct CoxData {
  std::vector<int> order;          // row indices sorted by ascending time
  std::vector<int> group_start;    // offsets into order, one per distinct time
  std::vector<std::vector<int>> deaths;  // event rows per group (row indices)
};

inline CoxData cox_prepare(const Eigen::VectorXd& time, const Eigen::VectorXi& status) {
  const int n = static_cast<int>(time.size());
  CoxData d;
  d.order.resize(static_cast<std::size_t>(n));
  std::iota(d.order.begin(), d.order.end(), 0);
  std::sort(d.order.begin(), d.order.end(), [&](int a, int b) { return time[a] < time[b]; });
  int i = 0;
  while (i < n) {
    const double t = time[d.order[static_cast<std::size_t>(i)]];
    d.group_start.push_back(i);
    std::vector<int> dead;
    while (i < n && time[d.order[static_cast<std::size_t>(i)]] == t) {
      const int row = d.order[static_cast<std::size_t>(i)];
      if (status[row] == 1) dead.push_back(row);
      ++i;
    }
    d.deaths.push_back(std::move(dead));
  }
  return d;
}

struct CoxEval {
  double loglik = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Penalized log partial likelihood with optional gradient/Hessian.
// Risk sums accumulate from the largest time downward; a tie group joins the
// risk set before its own event contribution is taken.
inline CoxEval cox_eval(const Eigen::MatrixXd& xc, const CoxData& d, const Eigen::VectorXd& beta,
                        bool efron, double ridge, bool want_derivs) {
  const int p = static_cast<int>(xc.cols());
  const int n_groups = static_cast<int>(d.group_start.size());
  const int n = static_cast<int>(xc.rows());

  CoxEval out;
  if (want_derivs) {
    out.grad = Eigen::VectorXd::Zero(p);
    out.hess = Eigen::MatrixXd::Zero(p, p);
  }

  Eigen::VectorXd eta = xc * beta;
  Eigen::VectorXd w = eta.array().exp();

  double loglik = 0.0;
  double risk_w = 0.0;
  Eigen::VectorXd risk_wx = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd risk_wxx = Eigen::MatrixXd::Zero(p, p);

  for (int g = n_groups - 1; g >= 0; --g) {
    const int start = d.group_start[static_cast<std::size_t>(g)];
    const int end = (g + 1 < n_groups) ? d.group_start[static_cast<std::size_t>(g) + 1] : n;
    for (int k = start; k < end; ++k) {
      const int row = d.order[static_cast<std::size_t>(k)];
      risk_w += w[row];
      if (want_derivs) {
        risk_wx.noalias() += w[row] * xc.row(row).transpose();
        risk_wxx.noalias() += w[row] * (xc.row(row).transpose() * xc.row(row));
      }
    }

    const auto& dead = d.deaths[static_cast<std::size_t>(g)];
    const int nd = static_cast<int>(dead.size());
    if (nd == 0) continue;

    double dead_w = 0.0;
    Eigen::VectorXd dead_wx = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd dead_wxx;
    if (want_derivs) dead_wxx = Eigen::MatrixXd::Zero(p, p);
    for (int row : dead) {
      loglik += eta[row];
      if (want_derivs) out.grad.noalias() += xc.row(row).transpose();
      if (efron) {
        dead_w += w[row];
        if (want_derivs) {
          dead_wx.noalias() += w[row] * xc.row(row).transpose();
          dead_wxx.noalias() += w[row] * (xc.row(row).transpose() * xc.row(row));
        }
      }
    }

    const int terms = efron ? nd : 1;
    for (int r = 0; r < terms; ++r) {
      const double f = efron ? static_cast<double>(r) / nd : 0.0;
      const double mult = efron ? 1.0 : static_cast<double>(nd);
      const double denom = risk_w - f * dead_w;
      if (!(denom > 0.0) || !std::isfinite(denom)) return out;  // overflow; loglik stays -inf
      loglik -= mult * std::log(denom);
      if (want_derivs) {
        Eigen::VectorXd m = (risk_wx - f * dead_wx) / denom;
        out.grad.noalias() -= mult * m;
        out.hess.noalias() -= mult * ((risk_wxx - f * dead_wxx) / denom - m * m.transpose());
      }
    }
  }

  if (ridge > 0.0) {
    loglik -= 0.5 * ridge * beta.squaredNorm();
    if (want_derivs) {
      out.grad.noalias() -= ridge * beta;
      out.hess.diagonal().array() -= ridge;
    }
  }
  if (std::isfinite(loglik)) out.loglik = loglik;
  return out;
}

// Newton-Raphson with step-halving on a concave objective. Returns the final
// iterate; throws SingularHessian / NonconvergenceError per the fit contract.
// `check` runs after every accepted step and may throw to abort the fit.
template <typename Eval, typename Check>
inline Eigen::VectorXd newton_maximize(Eigen::VectorXd theta, Eval&& eval, int max_iter, double tol,
                                       const char* singular_hint, Check&& check) {
  double loglik = eval(theta, false).loglik;
  for (int iter = 0; iter < max_iter; ++iter) {
    auto e = eval(theta, true);
    Eigen::MatrixXd a = -e.hess;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const double ev_max = es.eigenvalues().maxCoeff();
    const double ev_min = es.eigenvalues().minCoeff();
    if (!(ev_max > 0.0) || ev_min <= 1e-10 * std::max(ev_max, 1e-300))
      throw SurvError(ErrorCode::SingularHessian, singular_hint);
    Eigen::VectorXd dir = es.eigenvectors() *
                          (es.eigenvalues().array().inverse() *
                           (es.eigenvectors().transpose() * e.grad).array())
                              .matrix();

    double step = 1.0;
    bool improved = false;
    double loglik_new = loglik;
    Eigen::VectorXd theta_new;
    for (int h = 0; h <= 20; ++h) {
      theta_new = theta + step * dir;
      const double l = eval(theta_new, false).loglik;
      if (std::isfinite(l) && l >= loglik) {
        improved = true;
        loglik_new = l;
        break;
      }
      step *= 0.5;
    }
    if (!improved) return theta;  // no ascent possible: numerically at the optimum

    const double delta = loglik_new - loglik;
    theta = theta_new;
    loglik = loglik_new;
    check(theta);
    if (delta < tol) return theta;
  }
  std::vector<double> last(theta.data(), theta.data() + theta.size());
  throw NonconvergenceError("max_iter reached with |delta loglik| >= tol", std::move(last));
}

}  // namespace detail

// Cox proportional hazards via Newton-Raphson on the log partial likelihood.
// Features are mean-centered internally; beta is unaffected by the shift, and
// the stored centering vector fixes the lp/baseline scale for prediction.
inline FittedModel fit_coxph(const SurvivalTask& task, const CoxOptions& opt = {}) {
  opt.validate();
  if (task.p() < 1)
    throw SurvError(ErrorCode::InvalidArgument, "coxph requires at least one feature");
  if (task.n_events() < 1) throw SurvError(ErrorCode::NoEvents, "coxph requires at least one event");

  const Eigen::VectorXd center = task.features().colwise().mean();
  Eigen::MatrixXd xc = task.features().rowwise() - center.transpose();
  const auto data = detail::cox_prepare(task.time(), task.status());
  const bool efron = opt.ties == "efron";

  auto eval = [&](const Eigen::VectorXd& b, bool derivs) {
    return detail::cox_eval(xc, data, b, efron, opt.ridge, derivs);
  };
  Eigen::VectorXd beta = detail::newton_maximize(
      Eigen::VectorXd::Zero(task.p()), eval, opt.max_iter, opt.tol,
      "information matrix is singular; consider ridge > 0", [](const Eigen::VectorXd&) {});

  // Breslow baseline cumulative hazard at the centered covariates.
  Eigen::VectorXd w = (xc * beta).array().exp();
  CoxParams params;
  params.beta = beta;
  params.center = center;
  params.ties = opt.ties;
  const int n = task.n();
  double risk_w = 0.0;
  std::vector<double> group_risk(data.group_start.size());
  for (int g = static_cast<int>(data.group_start.size()) - 1; g >= 0; --g) {
    const int start = data.group_start[static_cast<std::size_t>(g)];
    const int end = (g + 1 < static_cast<int>(data.group_start.size()))
                        ? data.group_start[static_cast<std::size_t>(g) + 1]
                        : n;
    for (int k = start; k < end; ++k) risk_w += w[data.order[static_cast<std::size_t>(k)]];
    group_risk[static_cast<std::size_t>(g)] = risk_w;
  }
  double cumhaz = 0.0;
  for (std::size_t g = 0; g < data.group_start.size(); ++g) {
    const auto& dead = data.deaths[g];
    if (dead.empty()) continue;
    cumhaz += static_cast<double>(dead.size()) / group_risk[g];
    params.baseline_times.push_back(task.time()[dead.front()]);
    params.baseline_cumhaz.push_back(cumhaz);
  }

  FittedModel m;
  m.learner = "coxph";
  m.feature_names = task.feature_names();
  m.types = {PredictType::Crank, PredictType::Lp, PredictType::Distr};
  m.params = std::move(params);
  m.validate();
  return m;
}

}  // namespace survkit
