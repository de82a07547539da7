#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <survkit/errors.hpp>
#include <survkit/rng.hpp>
#include <survkit/task.hpp>

namespace survkit {

struct ResamplingSpec {
  std::string kind = "cv";  // cv | holdout
  int folds = 3;
  double train_ratio = 2.0 / 3.0;
  std::uint64_t seed = 0;
  bool stratify = false;  // by event status

  void validate() const {
    if (kind != "cv" && kind != "holdout")
      throw SurvError(ErrorCode::ConfigError, "resampling kind must be 'cv' or 'holdout'");
    if (kind == "cv" && folds < 2)
      throw SurvError(ErrorCode::InvalidArgument, "cv needs folds >= 2");
    if (kind == "holdout" && !(train_ratio > 0.0 && train_ratio < 1.0))
      throw SurvError(ErrorCode::InvalidArgument, "train_ratio must lie strictly in (0,1)");
  }
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

namespace detail {

// Deal shuffled indices into k folds so sizes differ by at most one. With
// stratification the deal runs per stratum, continuing round-robin so event
// proportions stay balanced.
inline std::vector<std::vector<int>> deal_folds(const SurvivalTask& task,
                                                const ResamplingSpec& spec, int k) {
  Rng rng(splitmix64(spec.seed));
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  if (!spec.stratify) {
    std::vector<int> idx = shuffled_indices(task.n(), rng);
    const int base = task.n() / k;
    const int rem = task.n() % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
      const int size = base + (f < rem ? 1 : 0);
      folds[static_cast<std::size_t>(f)].assign(idx.begin() + pos, idx.begin() + pos + size);
      pos += size;
    }
    return folds;
  }
  int next = 0;
  for (int wanted : {1, 0}) {
    std::vector<int> stratum;
    for (int i = 0; i < task.n(); ++i)
      if (task.status()[i] == wanted) stratum.push_back(i);
    std::vector<int> order = shuffled_indices(static_cast<int>(stratum.size()), rng);
    for (int j : order) {
      folds[static_cast<std::size_t>(next)].push_back(stratum[static_cast<std::size_t>(j)]);
      next = (next + 1) % k;
    }
  }
  return folds;
}

}  // namespace detail

// Deterministic given (seed, N, spec); sorted index sets.
inline std::vector<Split> instantiate(const ResamplingSpec& spec, const SurvivalTask& task) {
  spec.validate();
  const int n = task.n();

  if (spec.kind == "holdout") {
    if (n < 2)
      throw SurvError(ErrorCode::TooManyFolds, "holdout needs at least 2 observations");
    Rng rng(splitmix64(spec.seed));
    std::vector<int> idx = shuffled_indices(n, rng);
    int n_train = static_cast<int>(spec.train_ratio * n);
    n_train = std::clamp(n_train, 1, n - 1);
    Split s;
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.test.assign(idx.begin() + n_train, idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return {std::move(s)};
  }

  if (spec.folds > n)
    throw SurvError(ErrorCode::TooManyFolds, "cv folds (" + std::to_string(spec.folds) +
                                                 ") exceed observations (" + std::to_string(n) + ")");
  auto folds = detail::deal_folds(task, spec, spec.folds);
  std::vector<Split> splits(static_cast<std::size_t>(spec.folds));
  for (int f = 0; f < spec.folds; ++f) {
    auto& s = splits[static_cast<std::size_t>(f)];
    s.test = folds[static_cast<std::size_t>(f)];
    for (int g = 0; g < spec.folds; ++g)
      if (g != f)
        s.train.insert(s.train.end(), folds[static_cast<std::size_t>(g)].begin(),
                       folds[static_cast<std::size_t>(g)].end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
  }
  return splits;
}

}  // namespace survkit
