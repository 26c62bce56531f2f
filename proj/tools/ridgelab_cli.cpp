#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ridgelab/ridgelab.h"

using json = nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Flags {
  std::string config_path;
  std::string d, n, c, m, tau;
  std::vector<std::string> estimators;
  std::optional<std::uint64_t> reps, seed;
  std::optional<unsigned> workers;
  std::string out, format, direction, inject_fault;
  bool quiet = false;
};

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> parts;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return parts;
}

// Numbers become JSON numbers; anything else is passed through as a string
// so the config parser reports it against the field name.
json list_json(const std::string& list, bool integral) {
  json arr = json::array();
  for (const auto& tok : split(list)) {
    char* end = nullptr;
    errno = 0;
    if (integral) {
      const long long v = std::strtoll(tok.c_str(), &end, 10);
      if (!tok.empty() && *end == '\0' && errno == 0) {
        arr.push_back(v);
        continue;
      }
    } else {
      const double v = std::strtod(tok.c_str(), &end);
      if (!tok.empty() && *end == '\0' && std::isfinite(v)) {
        arr.push_back(v);
        continue;
      }
    }
    arr.push_back(tok);
  }
  return arr;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const char* data, size_t length) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.write(data, static_cast<std::streamsize>(length));
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move output into '" + path + "'");
  }
}

void progress_to_stderr(const char* message, void*) { std::fprintf(stderr, "[ridgelab] %s\n", message); }

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config file; flags override its fields");
  sub->add_option("--c", f.c, "Signal norms, comma separated (\"inf\" allowed where meaningful)");
  sub->add_option("--reps", f.reps, "Replicates per cell (>= 2)");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--workers", f.workers, "Worker threads (default: $RIDGELAB_WORKERS or 1)");
  sub->add_option("--out", f.out, "Output path (default: standard output)");
  sub->add_option("--format", f.format, "csv or json");
  sub->add_flag("--quiet", f.quiet, "No progress messages");
}

void add_grid(CLI::App* sub, Flags& f) {
  sub->add_option("--d", f.d, "Dimensions, comma separated");
  sub->add_option("--n", f.n, "Sample sizes, comma separated");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ridgelab: Monte Carlo risk of ridge-type estimators under random design"};
  app.set_version_flag("--version", std::string(rl_version()));
  app.require_subcommand(1);
  Flags f;

  auto* sweep = app.add_subcommand("risk-sweep", "Risk of estimators over a (d, n, c) grid");
  add_grid(sweep, f);
  add_common(sweep, f);
  sweep->add_option("--estimator", f.estimators,
                    "Estimator tag, repeatable: ridge:<c>, oracle_ridge, adaptive_ridge, ols, "
                    "scaled_ols_oracle, null, sphere_bayes[:<c>]");
  sweep->add_option("--direction", f.direction, "fixed or haar");

  auto* verify = app.add_subcommand("verify-asymptotics", "Check engine output against closed forms");
  add_grid(verify, f);
  add_common(verify, f);
  verify->add_option("--inject-fault", f.inject_fault)->group("");

  auto* bounds = app.add_subcommand("bounds", "Trace risk, sandwich bounds and gap bounds");
  add_grid(bounds, f);
  add_common(bounds, f);

  auto* seq = app.add_subcommand("seq-check", "Sequence-model checks by quadrature");
  seq->add_option("--m", f.m, "Dimensions (1 to 3), comma separated");
  seq->add_option("--tau", f.tau, "Noise scales, comma separated");
  add_common(seq, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  json cfg = json::object();
  try {
    if (!f.config_path.empty()) {
      cfg = json::parse(read_file(f.config_path));
      if (!cfg.is_object()) throw std::runtime_error("config file must hold a JSON object");
    }
  } catch (const json::parse_error& e) {
    std::cerr << "ridgelab: config error: " << f.config_path << " is not valid JSON at byte "
              << e.byte << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "ridgelab: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  cfg["command"] = app.get_subcommands().front()->get_name();
  if (!f.d.empty()) cfg["d"] = list_json(f.d, true);
  if (!f.n.empty()) cfg["n"] = list_json(f.n, true);
  if (!f.c.empty()) cfg["c"] = list_json(f.c, false);
  if (!f.m.empty()) cfg["m"] = list_json(f.m, true);
  if (!f.tau.empty()) cfg["tau"] = list_json(f.tau, false);
  if (!f.estimators.empty()) cfg["estimators"] = f.estimators;
  if (f.reps) cfg["reps"] = *f.reps;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.workers) {
    cfg["workers"] = *f.workers;
  } else if (!cfg.contains("workers")) {
    if (const char* env = std::getenv("RIDGELAB_WORKERS"); env && *env) {
      char* end = nullptr;
      const unsigned long w = std::strtoul(env, &end, 10);
      if (*end != '\0' || w < 1) {
        std::cerr << "ridgelab: config error: RIDGELAB_WORKERS must be a positive integer\n";
        return kExitConfig;
      }
      cfg["workers"] = w;
    }
  }
  if (!f.out.empty()) cfg["out"] = f.out;
  if (!f.format.empty()) cfg["format"] = f.format;
  if (!f.direction.empty()) cfg["direction"] = f.direction;
  if (!f.inject_fault.empty()) cfg["inject_fault"] = f.inject_fault;

  rl_experiment* exp = nullptr;
  if (rl_status st = rl_experiment_create(cfg.dump().c_str(), &exp); st != RL_OK) {
    std::cerr << "ridgelab: " << rl_status_string(st) << ": " << rl_last_error() << "\n";
    return st == RL_CONFIG_ERROR ? kExitConfig : kExitRuntime;
  }
  if (!f.quiet) rl_experiment_set_progress(exp, progress_to_stderr, nullptr);

  int exit_code = 0;
  if (rl_status st = rl_experiment_run(exp, &exit_code); st != RL_OK) {
    std::cerr << "ridgelab: " << rl_status_string(st) << ": " << rl_last_error() << "\n";
    rl_experiment_destroy(exp);
    return st == RL_CONFIG_ERROR ? kExitConfig : kExitRuntime;
  }

  const char* data = nullptr;
  size_t length = 0;
  rl_experiment_output(exp, &data, &length);
  const std::string out_path = cfg.value("out", std::string());
  try {
    if (out_path.empty()) {
      std::fwrite(data, 1, length, stdout);
      std::fflush(stdout);
    } else {
      write_file(out_path, data, length);
    }
  } catch (const std::exception& e) {
    std::cerr << "ridgelab: " << e.what() << "\n";
    rl_experiment_destroy(exp);
    return kExitRuntime;
  }
  rl_experiment_destroy(exp);
  return exit_code;
}
