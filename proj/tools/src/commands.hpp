#pragma once

#include "artifacts.hpp"
#include "config.hpp"

#include <iosfwd>
#include <string>

namespace stripeforge::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kGradCheckFailed = 1, kSolverFailure = 2, kValidationFailure = 3 };

struct Context {
  RunConfig cfg;
  Artifacts* out = nullptr;
  int threads = 1;
  std::ostream* log = nullptr;  // human-readable progress
  bool dump_periodic = false;   // periodic_map.json
  bool dump_prisms = false;     // subprisms.obj
};

const std::vector<std::string>& command_names();

/// Runs one command and writes its artifacts; returns 0 or 1 (grad-check
/// failure). Errors propagate as exceptions.
int run_command(const std::string& name, Context& ctx);

/// Per-vertex design angles and theta from a design CSV (vertex,p,theta).
void read_design_csv(const std::filesystem::path& path, int num_vertices, VecX& p, double& theta);

}  // namespace stripeforge::cli
