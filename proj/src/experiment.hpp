#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ridgelab {

enum class Command { RiskSweep, VerifyAsymptotics, Bounds, SeqCheck };
enum class OutputFormat { Csv, Json };

std::optional<Command> parse_command(std::string_view name);
const char* command_name(Command command);

struct ExperimentConfig {
  Command command = Command::RiskSweep;
  std::vector<std::int64_t> d;
  std::vector<std::int64_t> n;
  std::vector<double> c;
  std::vector<std::string> estimators;
  std::vector<std::int64_t> m;    // seq-check dimensions
  std::vector<double> tau;        // seq-check noise scales
  std::uint64_t reps = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  OutputFormat format = OutputFormat::Csv;
  std::string out;                // informational; the caller writes the file
  bool haar_direction = false;    // beta direction redrawn per replicate
  std::string inject_fault;       // verify-asymptotics: check whose reference is perturbed

  /// Parses a JSON object. Throws Error(ConfigError) naming the field or the
  /// byte offset of a syntax error. Missing grid fields fall back to the
  /// per-command defaults.
  static ExperimentConfig from_json(std::string_view text);
  std::string to_json() const;

  /// Throws Error(ConfigError) on an empty grid or an invalid cell.
  void validate() const;
};

struct ExperimentResult {
  int exit_code = 0;   // 0 success, 1 check failure
  std::string output;  // full CSV or JSON document
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the configured command. Output is assembled in memory; nothing is
/// returned on error.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Names of the checks run by verify-asymptotics, in report order.
std::vector<std::string> verify_check_names();

}  // namespace ridgelab
