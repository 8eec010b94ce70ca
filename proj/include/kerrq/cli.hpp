#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kerrq/noise.hpp"

namespace kerrq::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalid = 2,
  kSynthesis = 3,
  kTruncation = 4,
  kNonConvergence = 5,
};

/// Everything a subcommand reads. Unset optionals fall back to the preset's
/// own values.
struct RunConfig {
  std::string subcommand;

  // target
  std::string preset;
  std::string coeffs;  // "re:im,re:im,..." (":im" optional)
  std::string scheme_file;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> chi;
  int s = 2;
  int K = 2;

  double gamma = 0.1;
  double delta = 1e-3;
  NoiseParams noise;
  std::optional<double> epsilon;
  std::uint64_t seed = 20240917;
  std::string out;
  std::string format = "csv";

  // simulate
  bool oracle = true;

  // entangle-scan
  double x_min = 1e-4;
  double x_max = 1e2;
  int points = 13;
  std::vector<int> K_list{1, 2, 3};
  int restarts = 20;

  // feasibility
  std::string detector = "A";
  double fidelity = 0.9;
  double db_min = 0.0;
  double db_max = 40.0;
  double db_step = 0.5;
  double fixed_db = 10.0;
  double gamma2_max = 1.0;
  double p_min = 1e-6;
};

/// Parses `args` (without the program name) and runs the subcommand. Data
/// goes to `out` (or the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kerrq::cli
