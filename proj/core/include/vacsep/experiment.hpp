#pragma once

// Reproducible experiment runs: a configuration record, its validation, and
// a runner that writes a CSV result plus a JSON manifest next to it.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vacsep::experiment {

enum class Command {
  ChainNcrit,
  ChainOptimize,
  ChainCfit,
  ContEps,
  ContSweepLmin,
  ContSweepEpsmax,
  ContSweepSymmetric,
  SimonCheck,
};

std::string_view command_name(Command c);
std::optional<Command> parse_command(std::string_view name);
std::vector<std::string_view> command_names();

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitUnwritable = 4;

struct ExperimentConfig {
  Command command = Command::SimonCheck;
  /// Command-specific values keyed by flag name without dashes ("L",
  /// "D-grid", "d-max", ...), kept as text exactly as given.
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::optional<double> tol_eps;
  std::optional<double> tol_quad;
  std::string output_path;
  /// 0 defers to VACSEP_THREADS, then to the hardware count.
  unsigned threads = 0;
  /// Continue from the rows of an interrupted run with the same config.
  bool resume = false;

  /// Canonical JSON: {"command", "parameters", "seed", "tolerances",
  /// "output_path", "threads"}.
  std::string to_json() const;
  /// Throws InputError on malformed documents or unknown commands.
  static ExperimentConfig from_json(std::string_view text);
};

/// Every precondition the run would check, without computing anything.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Parameter names accepted by a command.
std::vector<std::string> parameter_names(Command c);

/// Manifest path belonging to a CSV path: "x.csv" -> "x.manifest.json".
std::string manifest_path_for(const std::string& csv_path);

/// The CSV used when no output path is configured.
std::string default_output_path(Command c);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string csv_path;
  std::string manifest_path;
  /// Human-readable result lines for the terminal.
  std::vector<std::string> messages;
};

/// Validates, dispatches to the owning module and writes the results.
/// Progress and warnings go to `log`.
RunOutcome run(const ExperimentConfig& config, std::ostream& log);

}  // namespace vacsep::experiment
