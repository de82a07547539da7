#pragma once

#include <Eigen/Core>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <survkit/errors.hpp>

namespace survkit {

// Feature matrix plus right-censored outcome. Immutable after construction.
class SurvivalTask {
 public:
  SurvivalTask(std::string id, Eigen::MatrixXd features, std::vector<std::string> feature_names,
               Eigen::VectorXd time, Eigen::VectorXi status)
      : id_(std::move(id)),
        features_(std::move(features)),
        feature_names_(std::move(feature_names)),
        time_(std::move(time)),
        status_(std::move(status)) {
    const Eigen::Index n = time_.size();
    if (n < 1) throw SurvError(ErrorCode::EmptyTask, "task needs at least one row");
    if (status_.size() != n || features_.rows() != n)
      throw SurvError(ErrorCode::LengthMismatch, "features, time and status row counts differ");
    if (static_cast<Eigen::Index>(feature_names_.size()) != features_.cols())
      throw SurvError(ErrorCode::LengthMismatch, "feature name count does not match columns");
    std::set<std::string> seen;
    for (const auto& name : feature_names_)
      if (!seen.insert(name).second)
        throw SurvError(ErrorCode::DuplicateColumn, "duplicate feature column '" + name + "'");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(time_[i]) || time_[i] <= 0.0)
        throw SurvError(ErrorCode::NonPositiveTime, "time values must be finite and > 0");
      if (status_[i] != 0 && status_[i] != 1)
        throw SurvError(ErrorCode::InvalidArgument, "status values must be 0 or 1");
    }
    if (!features_.allFinite())
      throw SurvError(ErrorCode::MissingValue, "features contain missing or non-finite values");
  }

  const std::string& id() const { return id_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Eigen::VectorXd& time() const { return time_; }
  const Eigen::VectorXi& status() const { return status_; }

  int n() const { return static_cast<int>(time_.size()); }
  int p() const { return static_cast<int>(features_.cols()); }

  int n_events() const {
    int e = 0;
    for (Eigen::Index i = 0; i < status_.size(); ++i) e += status_[i];
    return e;
  }

  // Row subset in the given index order.
  SurvivalTask subset(const std::vector<int>& rows) const {
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd f(m, features_.cols());
    Eigen::VectorXd t(m);
    Eigen::VectorXi s(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      f.row(i) = features_.row(rows[static_cast<std::size_t>(i)]);
      t[i] = time_[rows[static_cast<std::size_t>(i)]];
      s[i] = status_[rows[static_cast<std::size_t>(i)]];
    }
    return SurvivalTask(id_, std::move(f), feature_names_, std::move(t), std::move(s));
  }

 private:
  std::string id_;
  Eigen::MatrixXd features_;
  std::vector<std::string> feature_names_;
  Eigen::VectorXd time_;
  Eigen::VectorXi status_;
};

inline SurvivalTask task_from_columns(Eigen::MatrixXd features, std::vector<std::string> names,
                                      Eigen::VectorXd time, Eigen::VectorXi status,
                                      std::string id) {
  return SurvivalTask(std::move(id), std::move(features), std::move(names), std::move(time),
                      std::move(status));
}

}  // namespace survkit
