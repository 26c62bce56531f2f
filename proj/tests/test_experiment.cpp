#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "experiment.hpp"

using namespace ridgelab;

namespace {

ErrorCode config_code(const std::string& text) {
  try {
    ExperimentConfig::from_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;  // sentinel: no error raised
}

std::string message(const std::string& text) {
  try {
    ExperimentConfig::from_json(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::string run_cli(const std::string& args, int& status) {
  const std::string out = "cli_test_output.tmp";
  const std::string cmd = std::string(RIDGELAB_CLI_PATH) + " " + args + " --quiet > " + out + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out);
  std::stringstream buf;
  buf << in.rdbuf();
  std::remove(out.c_str());
  return buf.str();
}

}  // namespace

TEST_CASE("config errors name the offending field") {
  CHECK(config_code(R"({"command":"risk-sweep","d":[],"n":[30],"c":[1]})") == ErrorCode::ConfigError);
  CHECK(message(R"({"command":"risk-sweep","d":[],"n":[30],"c":[1]})").find("d: grid is empty") != std::string::npos);
  CHECK(message(R"({"command":"risk-sweep","d":[10],"n":[2],"c":[1]})").find("n[0]") != std::string::npos);
  CHECK(message(R"({"command":"risk-sweep","d":[10],"n":[30],"c":[1],"reps":1})").find("reps") != std::string::npos);
  CHECK(message(R"({"command":"risk-sweep","d":[10],"n":[30],"c":[1],"estimators":["lasso"]})")
            .find("estimators[0]") != std::string::npos);
  CHECK(message(R"({"command":"risk-sweep","d":[40],"n":[30],"c":[1],"estimators":["sphere_bayes"]})")
            .find("d <= n") != std::string::npos);
  CHECK(message(R"({"command":"risk-sweep","dd":[1]})").find("unknown field 'dd'") != std::string::npos);
  CHECK(message(R"({"command":"risk-sweep", "d": [1,}")").find("byte") != std::string::npos);
  CHECK(message(R"({"command":"fly"})").find("command") != std::string::npos);
  CHECK(message(R"({"command":"seq-check","m":[4]})").find("m[0]") != std::string::npos);
  CHECK(message(R"({"command":"verify-asymptotics","inject_fault":"nope"})").find("inject_fault") !=
        std::string::npos);
  CHECK(config_code(R"({"command":"risk-sweep","d":[10],"n":[30],"c":[1]})") == ErrorCode::InvalidArgument);
}

TEST_CASE("risk sweep CSV schema and rows") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      R"({"command":"risk-sweep","d":[10],"n":[30],"c":[1],"estimators":["null","ols"],"reps":200,"seed":4})");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.exit_code == 0);
  const auto ls = lines(r.output);
  REQUIRE(ls.size() == 4);
  CHECK(ls[0].rfind("# ridgelab ", 0) == 0);
  CHECK(ls[1] == "d,n,c,estimator,risk_mean,risk_stderr,reps,seed,reference_name,reference_value,deviation");
  CHECK(ls[2] == "10,30,1,null,1,0,200,4,null_exact,1,0");
  CHECK(ls[3].rfind("10,30,1,ols,", 0) == 0);
  CHECK(ls[3].find(",ols_exact,") != std::string::npos);
}

TEST_CASE("JSON output mirrors the rows") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      R"({"command":"risk-sweep","d":[10],"n":[30],"c":[1],"estimators":["null"],"reps":20,"format":"json"})");
  const std::string out = run_experiment(cfg).output;
  CHECK(out.find("\"metadata\"") != std::string::npos);
  CHECK(out.find("\"version\"") != std::string::npos);
  CHECK(out.find("\"wall_time_seconds\"") != std::string::npos);
  CHECK(out.find("\"reference_name\": \"null_exact\"") != std::string::npos);
}

TEST_CASE("sweeps are identical across worker counts") {
  std::string base;
  for (unsigned w : {1u, 4u, 8u}) {
    ExperimentConfig cfg = ExperimentConfig::from_json(
        R"({"command":"risk-sweep","d":[5,40],"n":[20],"c":[0.5,2],"estimators":["oracle_ridge","adaptive_ridge","ols"],"reps":97,"seed":12})");
    cfg.workers = w;
    const std::string out = run_experiment(cfg).output;
    if (base.empty()) base = out;
    CHECK(out == base);
  }
}

TEST_CASE("bounds and seq-check run") {
  ExperimentConfig b = ExperimentConfig::from_json(R"({"command":"bounds","d":[2,12],"n":[10],"c":[1],"reps":50})");
  const auto bl = lines(run_experiment(b).output);
  CHECK(bl.size() == 2 + 4 + 3);
  ExperimentConfig s = ExperimentConfig::from_json(R"({"command":"seq-check","m":[1],"tau":[1],"c":[1]})");
  const auto sl = lines(run_experiment(s).output);
  REQUIRE(sl.size() == 5);
  CHECK(sl[1] == "m,tau,c,quantity,value,reference_name,reference_value,deviation");
}

TEST_CASE("verify reports an injected fault by name") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      R"({"command":"verify-asymptotics","reps":200,"inject_fault":"mp_stieltjes_identity"})");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("mp_stieltjes_identity,") != std::string::npos);
  bool named = false;
  for (const auto& l : lines(r.output))
    if (l.rfind("mp_stieltjes_identity,", 0) == 0) named = l.find(",fail") != std::string::npos;
  CHECK(named);
}

TEST_CASE("command line exit codes and determinism") {
  int status = -1;
  const std::string a = run_cli("risk-sweep --d 8 --n 30 --c 1,2 --estimator oracle_ridge --reps 150 --seed 3 --workers 1", status);
  CHECK(status == 0);
  const std::string b = run_cli("risk-sweep --d 8 --n 30 --c 1,2 --estimator oracle_ridge --reps 150 --seed 3 --workers 4", status);
  CHECK(status == 0);
  CHECK(a == b);
  CHECK(a.find("8,30,2,oracle_ridge,") != std::string::npos);

  run_cli("risk-sweep --d 8 --n 2 --c 1", status);
  CHECK(status == 2);
  run_cli("risk-sweep --d x --n 30 --c 1", status);
  CHECK(status == 2);
  run_cli("risk-sweep --bogus", status);
  CHECK(status == 2);
  run_cli("verify-asymptotics --reps 100 --inject-fault brown_identity", status);
  CHECK(status == 1);

  const std::string path = "cli_test_config.json";
  {
    std::ofstream cfg(path);
    cfg << R"({"d":[8],"n":[30],"c":[1],"estimators":["null"],"reps":10,"seed":1})";
  }
  const std::string from_file = run_cli("risk-sweep --config " + path + " --seed 9", status);
  CHECK(status == 0);
  CHECK(from_file.find("8,30,1,null,1,0,10,9,") != std::string::npos);
  std::remove(path.c_str());
}
