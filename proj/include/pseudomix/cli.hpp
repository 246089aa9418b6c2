// cli.hpp - command implementations behind the pseudomix executable
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "pseudomix/io.hpp"

namespace pseudomix::cli {

enum ExitCode : int {
  kOk = 0,
  kNotConverged = 2,
  kInvalidInput = 3,
  kStall = 4,
  kVerifyFailed = 5,
};

struct DecomposeOptions {
  std::string input;
  std::string out;
  double tol_residual = 1e-8;
  int max_steps = 2000;
  int restarts = 8;
  std::uint64_t seed = 0;
  bool coalesce = false;
  int threads = 1;

  PipelineConfig pipeline_config() const;
};

/// Decomposes rho under cfg and packs the report; exit code is kOk,
/// kNotConverged or kStall. Shared by decompose and verify.
struct RunOutcome {
  io::Json report;
  int code = kOk;
  std::string message;
};
RunOutcome run_decomposition(const HermitianState<double>& rho, const PipelineConfig& cfg);

int cmd_decompose(const DecomposeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const std::string& input, std::ostream& out, std::ostream& err);
int cmd_random(Eigen::Index d1, Eigen::Index d2, Eigen::Index rank, std::uint64_t seed,
               const std::string& out_path, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& input, const std::string& report, std::ostream& out,
               std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, char** argv);

}  // namespace pseudomix::cli
