#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include <survkit/csv.hpp>
#include <survkit/measures.hpp>
#include <survkit/serialize.hpp>

#include "helpers.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  const char* dir = std::getenv("SURVKIT_SCRATCH");
  if (dir == nullptr) SKIP("SURVKIT_SCRATCH is not set; run through ctest");
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

// Shells out to the CLI under test, capturing both streams.
RunResult run_cli(const std::string& args) {
  const char* cli = std::getenv("SURVKIT_CLI");
  if (cli == nullptr) SKIP("SURVKIT_CLI is not set; run through ctest");
  static int counter = 0;
  const fs::path out_file = scratch_dir() / ("stdout_" + std::to_string(counter) + ".txt");
  const fs::path err_file = scratch_dir() / ("stderr_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd =
      std::string(cli) + " " + args + " >" + out_file.string() + " 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

fs::path shared_sim_csv() {
  static fs::path path;
  if (path.empty()) {
    path = scratch_dir() / "shared_sim.csv";
    const auto r = run_cli("simulate --n 120 --p 2 --beta 0.7,-0.5 --cens-rate 0.4 --seed 11 --out " +
                           path.string());
    REQUIRE(r.exit_code == 0);
  }
  return path;
}

}  // namespace

TEST_CASE("cli simulate writes the dataset and a sidecar spec") {
  const fs::path out = scratch_dir() / "sim_shape.csv";
  const auto r = run_cli("simulate --n 100 --p 2 --beta 0.5,-0.5 --cens-rate 0.3 --seed 11 --out " +
                         out.string());
  REQUIRE(r.exit_code == 0);

  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 101);
  CHECK(lines[0] == "x1,x2,time,status");

  const json sidecar = json::parse(slurp(out.string() + ".json"));
  CHECK(sidecar.at("n") == 100);
  CHECK(sidecar.at("p") == 2);
  CHECK((sidecar.at("beta") == json::array({0.5, -0.5})));
  CHECK(sidecar.at("shape") == 1.0);
  CHECK(sidecar.at("rate") == 1.0);
  CHECK(sidecar.at("cens_rate") == 0.3);
  CHECK(sidecar.at("seed") == 11);
  CHECK(sidecar.at("cens_time").is_null());

  SECTION("a rerun is byte-identical") {
    const fs::path again = scratch_dir() / "sim_shape_again.csv";
    const auto r2 = run_cli(
        "simulate --n 100 --p 2 --beta 0.5,-0.5 --cens-rate 0.3 --seed 11 --out " + again.string());
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(out) == slurp(again));
  }

  SECTION("beta length must match p") {
    const auto bad = run_cli("simulate --n 10 --p 2 --beta 1 --out " +
                             (scratch_dir() / "never.csv").string());
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("LengthMismatch") != std::string::npos);
  }
}

TEST_CASE("cli benchmark runs a grid and writes results") {
  const fs::path data = scratch_dir() / "bench_data.csv";
  REQUIRE(run_cli("simulate --n 300 --p 2 --beta 0.7,-0.5 --cens-rate 0.45 --seed 11 --out " +
                  data.string())
              .exit_code == 0);

  const fs::path out_dir = scratch_dir() / "bench_out";
  const json config = {
      {"tasks", json::array({{{"path", data.string()}, {"id", "sim300"}}})},
      {"learners",
       json::array({"kaplan", "coxph",
                     "weibull_aft | distrcompositor(estimator=kaplan, form=ph)"})},
      {"resampling", {{"kind", "cv"}, {"folds", 3}, {"seed", 11}}},
      {"measures", json::array({"intlogloss"})},
      {"output_dir", out_dir.string()}};
  const fs::path config_path = scratch_dir() / "bench_config.json";
  spit(config_path, config.dump(2));

  const auto r = run_cli("benchmark --config " + config_path.string());
  REQUIRE(r.exit_code == 0);

  const auto result_lines = lines_of(slurp(out_dir / "results.csv"));
  REQUIRE(result_lines.size() == 10);
  CHECK(result_lines[0] == "task,learner,fold,measure,score,errored,error");

  const json report = json::parse(slurp(out_dir / "aggregates.json"));
  REQUIRE(report.at("rows").size() == 9);
  REQUIRE(report.at("aggregates").size() == 3);
  for (const auto& agg : report.at("aggregates")) {
    CHECK(agg.at("folds_scored") == 3);
    CHECK(agg.at("folds_errored") == 0);
    REQUIRE_FALSE(agg.at("score").is_null());
    double sum = 0.0;
    int count = 0;
    for (const auto& row : report.at("rows"))
      if (row.at("learner") == agg.at("learner")) {
        sum += row.at("score").get<double>();
        ++count;
      }
    REQUIRE(count == 3);
    CHECK_THAT(agg.at("score").get<double>(),
               Catch::Matchers::WithinAbs(sum / 3.0, 1e-12));
  }

  // stdout table: header plus one line per aggregate cell
  const auto table = lines_of(r.out);
  REQUIRE(table.size() == 4);
  CHECK(table[0] == "task,learner,measure,score,folds_scored,folds_errored");

  CHECK(fs::exists(out_dir / "sim300_manifest.json"));

  SECTION("reruns and thread counts do not change the bytes") {
    const std::string baseline = slurp(out_dir / "results.csv");
    json config2 = config;
    config2["output_dir"] = (scratch_dir() / "bench_out2").string();
    const fs::path config2_path = scratch_dir() / "bench_config2.json";
    spit(config2_path, config2.dump(2));
    REQUIRE(run_cli("benchmark --config " + config2_path.string() + " --threads 4").exit_code ==
            0);
    CHECK(slurp(scratch_dir() / "bench_out2" / "results.csv") == baseline);
  }

  SECTION("an unknown measure is rejected by name") {
    json bad = config;
    bad["measures"] = json::array({"brier"});
    const fs::path bad_path = scratch_dir() / "bench_bad_measure.json";
    spit(bad_path, bad.dump(2));
    const auto rb = run_cli("benchmark --config " + bad_path.string());
    CHECK(rb.exit_code == 2);
    CHECK(rb.err.find("unknown measure 'brier'") != std::string::npos);
  }
}

TEST_CASE("cli benchmark reports fully errored cells through the exit code") {
  const fs::path data = scratch_dir() / "all_censored.csv";
  spit(data, "time,status\n1,0\n2,0\n3,0\n4,0\n5,0\n6,0\n");
  const fs::path out_dir = scratch_dir() / "bench_err_out";
  const json config = {{"tasks", json::array({{{"path", data.string()}, {"id", "cens"}}})},
                       {"learners", json::array({"kaplan"})},
                       {"resampling", {{"kind", "cv"}, {"folds", 2}, {"seed", 1}}},
                       {"measures", json::array({"intlogloss"})},
                       {"output_dir", out_dir.string()}};
  const fs::path config_path = scratch_dir() / "bench_err.json";
  spit(config_path, config.dump(2));

  const auto r = run_cli("benchmark --config " + config_path.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("fully errored") != std::string::npos);

  const auto result_lines = lines_of(slurp(out_dir / "results.csv"));
  REQUIRE(result_lines.size() == 3);
  for (std::size_t i = 1; i < result_lines.size(); ++i)
    CHECK(result_lines[i].find(",,1,") != std::string::npos);  // empty score, errored flag set
}

TEST_CASE("cli calibplot on kaplan-meier is self-calibrated") {
  const fs::path out = scratch_dir() / "calib_km.csv";
  const auto r = run_cli("calibplot --learner kaplan --data " + shared_sim_csv().string() +
                         " --out " + out.string());
  REQUIRE(r.exit_code == 0);

  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() > 2);
  CHECK(lines[0] == "t,mean_pred_surv,km_surv");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string t, pred, km;
    REQUIRE(std::getline(row, t, ','));
    REQUIRE(std::getline(row, pred, ','));
    REQUIRE(std::getline(row, km, ','));
    double pred_v = 0.0, km_v = 0.0;
    REQUIRE(survkit::detail::parse_double_strict(pred, pred_v));
    REQUIRE(survkit::detail::parse_double_strict(km, km_v));
    CHECK_THAT(pred_v, Catch::Matchers::WithinAbs(km_v, 1e-12));
  }

  SECTION("descriptor parse failures exit with a config error") {
    const auto bad = run_cli("calibplot --learner 'coxph(' --data " + shared_sim_csv().string() +
                             " --out " + (scratch_dir() / "never2.csv").string());
    CHECK(bad.exit_code == 2);
  }
}

TEST_CASE("cli predict round-trips a model through JSON") {
  const fs::path model = scratch_dir() / "cox_model.json";
  const fs::path pred1 = scratch_dir() / "pred_direct.json";
  const fs::path pred2 = scratch_dir() / "pred_loaded.json";

  const auto fit = run_cli("predict --learner coxph --data " + shared_sim_csv().string() +
                           " --save-model " + model.string() + " --out " + pred1.string());
  REQUIRE(fit.exit_code == 0);

  const auto load = run_cli("predict --model " + model.string() + " --data " +
                            shared_sim_csv().string() + " --out " + pred2.string());
  REQUIRE(load.exit_code == 0);
  CHECK(slurp(pred1) == slurp(pred2));

  SECTION("an unknown learner is rejected") {
    const auto bad = run_cli("predict --learner forest --data " + shared_sim_csv().string() +
                             " --out " + (scratch_dir() / "never3.json").string());
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("unknown learner 'forest'") != std::string::npos);
  }
}

TEST_CASE("cli predict carries the one-hot encoding in the model file") {
  const fs::path data = scratch_dir() / "cats.csv";
  spit(data,
       "sex,time,status\n"
       "f,1,1\nm,2,1\nf,3,1\nm,4,0\nf,5,1\nm,6,1\n"
       "f,7,0\nm,8,1\nf,9,1\nm,10,1\nf,11,0\nm,12,1\n");
  const fs::path model = scratch_dir() / "cats_model.json";
  const fs::path pred = scratch_dir() / "cats_pred.json";

  REQUIRE(run_cli("predict --learner coxph --data " + data.string() + " --save-model " +
                  model.string())
              .exit_code == 0);

  const json saved = json::parse(slurp(model));
  CHECK((saved.at("feature_names") == json::array({"sex=m"})));
  REQUIRE(saved.contains("encoding"));
  const json& col = saved.at("encoding").at("columns").at(0);
  CHECK(col.at("name") == "sex");
  CHECK(col.at("kind") == "onehot");
  CHECK((col.at("levels") == json::array({"f", "m"})));

  REQUIRE(run_cli("predict --model " + model.string() + " --data " + data.string() + " --out " +
                  pred.string())
              .exit_code == 0);
  const json loaded = json::parse(slurp(pred));
  CHECK(loaded.at("lp").size() == 12);
}

TEST_CASE("cli score matches the in-process measures") {
  const fs::path pred_path = scratch_dir() / "score_pred.json";
  REQUIRE(run_cli("predict --learner kaplan --data " + shared_sim_csv().string() + " --out " +
                  pred_path.string())
              .exit_code == 0);

  const auto r = run_cli("score --pred " + pred_path.string() + " --measures graf,intlogloss,schmid");
  REQUIRE(r.exit_code == 0);

  const auto pred = survkit::prediction_from_json(survkit::parse_json_file(pred_path.string()));
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "measure,score");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto comma = lines[i].find(',');
    REQUIRE(comma != std::string::npos);
    const std::string id = lines[i].substr(0, comma);
    double reported = 0.0;
    REQUIRE(survkit::detail::parse_double_strict(lines[i].substr(comma + 1), reported));
    CHECK(reported == survkit::evaluate_measure({.id = id}, pred));
  }
}

TEST_CASE("cli rejects unreadable inputs with exit code 2") {
  const fs::path empty = scratch_dir() / "empty.csv";
  spit(empty, "");
  CHECK(run_cli("predict --learner kaplan --data " + empty.string() + " --out " +
                (scratch_dir() / "never4.json").string())
            .exit_code == 2);

  const fs::path bad_event = scratch_dir() / "bad_event.csv";
  spit(bad_event, "time,status\n1,1\n2,2\n");
  const auto r = run_cli("predict --learner kaplan --data " + bad_event.string() + " --out " +
                         (scratch_dir() / "never5.json").string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("InvalidArgument") != std::string::npos);

  const auto missing = run_cli("predict --learner kaplan --data " + shared_sim_csv().string() +
                               " --time-col bogus --out " +
                               (scratch_dir() / "never6.json").string());
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("bogus") != std::string::npos);

  const auto no_sub = run_cli("frobnicate");
  CHECK(no_sub.exit_code == 2);
}
