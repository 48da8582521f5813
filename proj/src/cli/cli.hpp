#ifndef PCSFT_CLI_CLI_HPP
#define PCSFT_CLI_CLI_HPP

// Batch experiment runner. Each command reads a JSON config (or a bundled
// preset), validates it completely, runs, and writes CSV/JSON outputs plus a
// manifest into the output directory.

#include "pcsft/core.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pcsft::cli {

using json = nlohmann::json;

enum ExitCode : int { exit_pass = 0, exit_usage = 2, exit_inconclusive = 3, exit_numerical = 4 };

/// Malformed or inconsistent configuration.
struct ConfigError : Error {
  using Error::Error;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

struct Outcome {
  int exit_code = exit_pass;
  json report;
  std::string message;
};

// config.cpp
json preset(const std::string& name);
std::vector<std::string> preset_names();
json load_config_file(const std::filesystem::path& path);
/// Expands "preset", then applies the overrides.
json resolve_config(json config, const Overrides& overrides);
std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const json& config);
void write_manifest(const std::filesystem::path& dir, const std::string& command, const json& config);

// Commands take a resolved config. Errors inside map to the exit-code contract.
Outcome run_dequantize(const json& config);
Outcome run_evolve(const json& config);
Outcome run_trace_check(const json& config);
Outcome run_alpha_bound(double b_ev, std::ostream& out, std::ostream& err);

/// Runs `command` on a config with error mapping; writes the manifest.
Outcome run_command(const std::string& command, const json& config);

/// Full command line entry point.
int main(int argc, char** argv);

}  // namespace pcsft::cli

#endif  // PCSFT_CLI_CLI_HPP
