#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include <survkit/compose.hpp>
#include <survkit/coxph.hpp>
#include <survkit/learners.hpp>
#include <survkit/pipeline.hpp>
#include <survkit/simulate.hpp>

#include "helpers.hpp"

using namespace survkit;
using testhelp::outcome_pred;
using testhelp::vecd;
using testhelp::veci;

namespace {

FittedModel curve_model(std::vector<double> grid, std::vector<double> surv) {
  FittedModel m;
  m.learner = "kaplan";
  m.types = {PredictType::Distr, PredictType::Crank, PredictType::Response};
  m.params = CurveParams{std::move(grid), std::move(surv)};
  return m;
}

SurvivalPrediction lp_pred(std::vector<double> lp) {
  std::vector<double> time(lp.size(), 1.0);
  std::vector<int> status(lp.size(), 1);
  SurvivalPrediction pred = outcome_pred(std::move(time), std::move(status));
  pred.lp = vecd(std::move(lp));
  return pred;
}

}  // namespace

TEST_CASE("distrcompositor with zero lp reproduces the baseline") {
  const FittedModel baseline = curve_model({1, 2, 3}, {0.9, 0.5, 0.2});
  const SurvivalPrediction pred = lp_pred({0.0, 0.0});
  for (const std::string form : {"ph", "aft", "po"}) {
    const SurvivalPrediction out = distrcompositor(pred, baseline, form);
    REQUIRE(out.distr->size() == 2);
    for (const auto& d : *out.distr) {
      REQUIRE((d.grid() == std::vector<double>{1, 2, 3}));
      CHECK_THAT(d.surv()[0], Catch::Matchers::WithinAbs(0.9, 1e-12));
      CHECK_THAT(d.surv()[1], Catch::Matchers::WithinAbs(0.5, 1e-12));
      CHECK_THAT(d.surv()[2], Catch::Matchers::WithinAbs(0.2, 1e-12));
    }
    // input prediction types pass through
    CHECK(out.lp.has_value());
  }
}

TEST_CASE("distrcompositor spot values") {
  SECTION("ph squares the baseline at lp = log 2") {
    const FittedModel baseline = curve_model({1}, {0.81});
    const SurvivalPrediction out = distrcompositor(lp_pred({std::log(2.0)}), baseline, "ph");
    CHECK_THAT((*out.distr)[0].surv()[0], Catch::Matchers::WithinAbs(0.6561, 1e-12));
  }

  SECTION("po odds shift at lp = log 3") {
    const FittedModel baseline = curve_model({1}, {0.5});
    const SurvivalPrediction out = distrcompositor(lp_pred({std::log(3.0)}), baseline, "po");
    CHECK_THAT((*out.distr)[0].surv()[0], Catch::Matchers::WithinAbs(0.25, 1e-12));
  }

  SECTION("aft rescales time by exp(-lp)") {
    const FittedModel baseline = curve_model({1, 2}, {0.8, 0.4});
    const SurvivalPrediction out = distrcompositor(lp_pred({std::log(2.0)}), baseline, "aft");
    const auto& d = (*out.distr)[0];
    // t = 2 maps to baseline time 1
    CHECK(d.survival_at(2.0) == 0.8);
    CHECK(d.survival_at(1.0) == 1.0);
  }

  SECTION("aft saturates instead of overflowing on extreme lp") {
    const FittedModel baseline = curve_model({1, 2}, {0.8, 0.4});
    const SurvivalPrediction out = distrcompositor(lp_pred({-800.0}), baseline, "aft");
    for (double s : (*out.distr)[0].surv()) CHECK(s == 0.4);
  }
}

TEST_CASE("distrcompositor output is a valid distribution for any lp and form") {
  testhelp::TestRng rng(747);
  for (int rep = 0; rep < 20; ++rep) {
    const SurvivalDistribution base = testhelp::random_distribution(rng);
    const FittedModel baseline = curve_model(base.grid(), base.surv());
    std::vector<double> lps(4);
    for (auto& v : lps) v = rng.uniform(-10.0, 10.0);
    const SurvivalPrediction pred = lp_pred(lps);
    for (const std::string form : {"ph", "aft", "po"}) {
      const SurvivalPrediction out = distrcompositor(pred, baseline, form);
      for (const auto& d : *out.distr) {
        CHECK(d.grid() == base.grid());
        double prev = 1.0;
        for (double s : d.surv()) {
          CHECK(s >= 0.0);
          CHECK(s <= prev);
          prev = s;
        }
      }
    }
  }
}

TEST_CASE("ph composition orders subjects stochastically by lp") {
  testhelp::TestRng rng(757);
  for (int rep = 0; rep < 10; ++rep) {
    const SurvivalDistribution base = testhelp::random_distribution(rng);
    const FittedModel baseline = curve_model(base.grid(), base.surv());
    const double a = rng.uniform(-5.0, 5.0);
    const double b = rng.uniform(-5.0, 5.0);
    const SurvivalPrediction out = distrcompositor(lp_pred({a, b}), baseline, "ph");
    const auto& da = (*out.distr)[0];
    const auto& db = (*out.distr)[1];
    for (std::size_t j = 0; j < da.grid().size(); ++j) {
      if (a > b)
        CHECK(da.surv()[j] <= db.surv()[j]);
      else
        CHECK(da.surv()[j] >= db.surv()[j]);
    }
  }
}

TEST_CASE("composed cox predictions approach the native breslow distr as effects shrink") {
  // The kaplan baseline estimates the marginal survival, not the cox baseline,
  // so the composition is only an approximation; the mismatch scales with the
  // spread of the linear predictor and vanishes as the coefficients go to zero.
  const auto max_gap = [](std::vector<double> beta) {
    const SimSpec spec{.n = 2000, .p = 2, .beta = vecd(beta), .cens_rate = 0.45, .seed = 11};
    const SurvivalTask all = simulate(spec);
    std::vector<int> first, second;
    for (int i = 0; i < 1000; ++i) first.push_back(i);
    for (int i = 1000; i < 2000; ++i) second.push_back(i);
    const SurvivalTask train = all.subset(first);
    const SurvivalTask test = all.subset(second);

    const FittedModel cox = fit_coxph(train);
    const SurvivalPrediction native = predict(cox, test);
    const FittedModel km = fit_kaplan_meier(train);
    const SurvivalPrediction composed = distrcompositor(native, km, "ph");

    const auto& grid = (*composed.distr)[0].grid();
    REQUIRE((*native.distr)[0].grid() == grid);
    double gap = 0.0;
    for (int i = 0; i < test.n(); ++i) {
      const auto& dn = (*native.distr)[static_cast<std::size_t>(i)];
      const auto& dc = (*composed.distr)[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < grid.size(); ++j)
        gap = std::max(gap, std::abs(dn.surv()[j] - dc.surv()[j]));
    }
    return gap;
  };

  const double strong = max_gap({0.7, -0.5});
  const double weak = max_gap({0.1, -0.05});
  CHECK(weak < 0.05);
  CHECK(weak < strong);
}

TEST_CASE("distrcompositor fallback and error paths") {
  const FittedModel baseline = curve_model({1, 2}, {0.6, 0.3});

  SECTION("crank stands in for a missing lp") {
    SurvivalPrediction pred = outcome_pred({1, 2}, {1, 1});
    pred.crank = vecd({0.5, -0.5});
    const SurvivalPrediction out = distrcompositor(pred, baseline, "ph");
    REQUIRE(out.distr->size() == 2);
    // higher crank, higher risk: survival below the low-crank subject's
    CHECK((*out.distr)[0].surv()[0] < (*out.distr)[1].surv()[0]);
  }

  SECTION("neither lp nor crank") {
    try {
      distrcompositor(outcome_pred({1, 2}, {1, 1}), baseline, "ph");
      FAIL("expected MissingLPandCrank");
    } catch (const SurvError& e) {
      CHECK(e.code() == ErrorCode::MissingLPandCrank);
    }
  }

  SECTION("bad form") {
    try {
      distrcompositor(lp_pred({0.0}), baseline, "logit");
      FAIL("expected InvalidForm");
    } catch (const SurvError& e) {
      CHECK(e.code() == ErrorCode::InvalidForm);
    }
  }

  SECTION("empty baseline grid") {
    const FittedModel empty = curve_model({}, {});
    try {
      distrcompositor(lp_pred({0.0}), empty, "ph");
      FAIL("expected GridEmpty");
    } catch (const SurvError& e) {
      CHECK(e.code() == ErrorCode::GridEmpty);
    }
  }

  SECTION("baseline must be a curve model") {
    const SimSpec spec{.n = 50, .p = 1, .beta = vecd({0.5}), .cens_rate = 0.2, .seed = 2};
    const SurvivalTask task = simulate(spec);
    const FittedModel cox = fit_coxph(task);
    CHECK_THROWS_MATCHES(distrcompositor(lp_pred({0.0}), cox, "ph"), SurvError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                             "baseline must be a kaplan or nelson model")));
  }
}

TEST_CASE("crankcompositor summarizes distributions into ranks") {
  SurvivalPrediction pred = outcome_pred({1, 2}, {1, 1});
  pred.distr = std::vector<SurvivalDistribution>{SurvivalDistribution({1, 2}, {0.5, 0.0}),
                                                 SurvivalDistribution({2, 4}, {0.5, 0.0})};

  SECTION("mean summary") {
    const SurvivalPrediction out = crankcompositor(pred, "mean");
    CHECK((*out.crank)[0] == -1.5);
    CHECK((*out.crank)[1] == -3.0);
    CHECK((*out.response)[0] == 1.5);
    CHECK((*out.response)[1] == 3.0);
  }

  SECTION("median summary") {
    const SurvivalPrediction out = crankcompositor(pred, "median");
    CHECK((*out.crank)[0] == -1.0);
    CHECK((*out.crank)[1] == -2.0);
  }

  SECTION("flags") {
    SurvivalPrediction with_crank = pred;
    with_crank.crank = vecd({7.0, 8.0});
    const SurvivalPrediction kept = crankcompositor(with_crank, "mean", false, false);
    CHECK((*kept.crank)[0] == 7.0);
    CHECK((*kept.crank)[1] == 8.0);
    CHECK_FALSE(kept.response.has_value());

    const SurvivalPrediction overwritten = crankcompositor(with_crank, "mean", true, false);
    CHECK((*overwritten.crank)[0] == -1.5);
  }

  SECTION("idempotent under repetition") {
    const SurvivalPrediction once = crankcompositor(pred, "mean");
    const SurvivalPrediction twice = crankcompositor(once, "mean");
    CHECK(testhelp::bitwise_equal(*once.crank, *twice.crank));
    CHECK(testhelp::bitwise_equal(*once.response, *twice.response));
  }

  SECTION("errors") {
    CHECK_THROWS_AS(crankcompositor(pred, "mode"), SurvError);
    try {
      crankcompositor(outcome_pred({1}, {1}), "mean");
      FAIL("expected MissingDistr");
    } catch (const SurvError& e) {
      CHECK(e.code() == ErrorCode::MissingDistr);
    }
  }
}

TEST_CASE("crank from composed means agrees with the cox ranking") {
  const SimSpec spec{.n = 300, .p = 2, .beta = vecd({0.7, -0.5}), .cens_rate = 0.45, .seed = 11};
  const SurvivalTask all = simulate(spec);
  std::vector<int> first, second;
  for (int i = 0; i < 200; ++i) first.push_back(i);
  for (int i = 200; i < 300; ++i) second.push_back(i);

  const PipelineSpec pipe = PipelineSpec::parse("coxph | crankcompositor(mean)");
  const FittedPipeline fitted = fit_pipeline(pipe, all.subset(first));
  const SurvivalPrediction pred = predict_pipeline(fitted, all.subset(second));

  REQUIRE(pred.lp.has_value());
  for (int i = 0; i < pred.size(); ++i)
    for (int j = i + 1; j < pred.size(); ++j) {
      if ((*pred.lp)[i] == (*pred.lp)[j]) continue;
      const bool lp_higher = (*pred.lp)[i] > (*pred.lp)[j];
      const bool crank_higher = (*pred.crank)[i] > (*pred.crank)[j];
      CHECK(lp_higher == crank_higher);
    }
}

TEST_CASE("pipeline descriptor parsing") {
  SECTION("multi-stage with learner options") {
    const PipelineSpec spec = PipelineSpec::parse(
        "coxph(ties=breslow, ridge=0.5) | distrcompositor(estimator=nelson, form=aft) | "
        "crankcompositor(median, set_response=false)");
    CHECK(spec.learner.id == "coxph");
    CHECK(spec.learner.cox.ties == "breslow");
    CHECK(spec.learner.cox.ridge == 0.5);
    REQUIRE(spec.stages.size() == 2);
    CHECK(spec.stages[0].kind == "distrcompositor");
    CHECK(spec.stages[0].estimator == "nelson");
    CHECK(spec.stages[0].form == "aft");
    CHECK(spec.stages[1].kind == "crankcompositor");
    CHECK(spec.stages[1].summary == "median");
    CHECK_FALSE(spec.stages[1].set_response);
    CHECK(spec.stages[1].overwrite_crank);
  }

  SECTION("bare learner") {
    const PipelineSpec spec = PipelineSpec::parse("kaplan");
    CHECK(spec.learner.id == "kaplan");
    CHECK(spec.stages.empty());
  }

  SECTION("rejects malformed input") {
    CHECK_THROWS_MATCHES(PipelineSpec::parse("forest"), SurvError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown learner 'forest'")));
    CHECK_THROWS_MATCHES(PipelineSpec::parse("coxph | smooth"), SurvError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown pipeline stage")));
    CHECK_THROWS_AS(PipelineSpec::parse("coxph(ties=breslow"), SurvError);
    CHECK_THROWS_MATCHES(PipelineSpec::parse("coxph(breslow)"), SurvError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                             "learner parameters must be named")));
    CHECK_THROWS_AS(PipelineSpec::parse("coxph(ridge=abc)"), SurvError);
    CHECK_THROWS_AS(PipelineSpec::parse("kaplan(x=1)"), SurvError);
    CHECK_THROWS_AS(PipelineSpec::parse("coxph | crankcompositor(max)"), SurvError);
    CHECK_THROWS_AS(PipelineSpec::parse("coxph | distrcompositor(form=logit)"), SurvError);
    CHECK_THROWS_AS(PipelineSpec::parse(""), SurvError);
  }
}

TEST_CASE("declared prediction types track the stages") {
  auto types_of = [](const std::string& d) { return PipelineSpec::parse(d).declared_types(); };

  CHECK((types_of("kaplan") ==
         std::set<PredictType>{PredictType::Distr, PredictType::Crank, PredictType::Response}));
  CHECK((types_of("coxph") ==
         std::set<PredictType>{PredictType::Crank, PredictType::Lp, PredictType::Distr}));
  CHECK((types_of("weibull_aft") ==
         std::set<PredictType>{PredictType::Crank, PredictType::Lp, PredictType::Distr,
                               PredictType::Response}));
  CHECK((types_of("coxph | crankcompositor(mean)") ==
         std::set<PredictType>{PredictType::Crank, PredictType::Lp, PredictType::Distr,
                               PredictType::Response}));
  CHECK((types_of("coxph | distrcompositor(estimator=kaplan, form=ph)") ==
         std::set<PredictType>{PredictType::Crank, PredictType::Lp, PredictType::Distr}));
}

TEST_CASE("pipelines fit and predict end to end") {
  const SimSpec spec{.n = 200, .p = 2, .beta = vecd({0.6, -0.4}), .cens_rate = 0.3, .seed = 33};
  const SurvivalTask all = simulate(spec);
  std::vector<int> first, second;
  for (int i = 0; i < 150; ++i) first.push_back(i);
  for (int i = 150; i < 200; ++i) second.push_back(i);
  const SurvivalTask train = all.subset(first);
  const SurvivalTask test = all.subset(second);

  const PipelineSpec pipe = PipelineSpec::parse(
      "weibull_aft | distrcompositor(estimator=kaplan, form=ph) | crankcompositor(mean)");
  const FittedPipeline fitted = fit_pipeline(pipe, train);
  REQUIRE(fitted.baselines.size() == 2);
  CHECK(fitted.baselines[0].has_value());
  CHECK_FALSE(fitted.baselines[1].has_value());

  const SurvivalPrediction pred = predict_pipeline(fitted, test);
  REQUIRE(pred.distr.has_value());
  REQUIRE(pred.crank.has_value());
  REQUIRE(pred.response.has_value());

  // composed distr lives on the training kaplan-meier grid
  const auto& km = std::get<CurveParams>(fitted.baselines[0]->params);
  CHECK((*pred.distr)[0].grid() == km.grid);

  // crank was rebuilt from the composed distr means
  for (int i = 0; i < pred.size(); ++i) {
    CHECK((*pred.crank)[i] == -(*pred.distr)[static_cast<std::size_t>(i)].mean());
    CHECK((*pred.response)[i] == (*pred.distr)[static_cast<std::size_t>(i)].mean());
  }
}
