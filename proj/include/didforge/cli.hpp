#ifndef DIDFORGE_CLI_HPP
#define DIDFORGE_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "didforge/gtatt.hpp"
#include "didforge/inference.hpp"
#include "didforge/panel.hpp"

namespace didforge {

// Exit codes: 0 success, 2 input/validation error, 3 numerical failure
// (rank, overlap, separation).
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string subcommand;
  std::string input;
  ColumnMapping columns;
  Method method = Method::DR;
  BasePeriod base_period = BasePeriod::Varying;
  ComparisonGroup comparison = ComparisonGroup::NotYetTreated;
  int bootstrap_draws = 999;
  Multiplier multiplier = Multiplier::Rademacher;
  std::uint64_t seed = 1;
  double ci_level = 0.95;
  std::string out_dir = ".";
  int threads = 0;
  // simulate
  std::string preset;
  std::string config_path;
  int n_override = 0;
  // diagnose
  bool gps_benchmark = false;
  std::vector<std::string> functions;
  // decompose
  std::string dgp_config_path;
  bool estimated_reference = false;
};

int cmd_estimate(const RunConfig& cfg);
int cmd_decompose(const RunConfig& cfg);
int cmd_diagnose(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);

// Parse argv and dispatch; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace didforge

#endif
