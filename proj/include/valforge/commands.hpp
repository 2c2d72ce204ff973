#pragma once

// Experiment driver behind the valforge tool: every command takes an
// ExperimentConfig and returns its primary output plus side files.

#include "valforge/bodies.hpp"
#include "valforge/synthesis.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace valforge {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int math_failure = 1;
inline constexpr int input_error = 2;
}  // namespace exit_code

struct ExperimentConfig {
  std::string command;
  int n = 3;
  int k = 1;
  int degree = 20;
  double tol = 1e-2;
  unsigned seed = 1;
  std::string out;
  nlohmann::json raw = nlohmann::json::object();  // the config file, if any

  bool all_balls = false;  // spanning-check negative control
  std::string eps_sweep = "1e-2:1e-5:7";
  nlohmann::json artifact;  // verify
  nlohmann::json bodies;    // verify
};

/// Reads n, k, degree, tol, seed, out and eps_sweep from a config object,
/// keeping the defaults of `base` for missing fields.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

struct CommandResult {
  int exit_code = exit_code::ok;
  std::string output;                                     // stdout
  std::vector<std::pair<std::string, std::string>> files;  // written under --out
  std::string message;                                    // stderr summary
};

/// Body table {"id": body, ...}.
std::map<std::string, ConvexBody> bodies_from_json(const nlohmann::json& j, int n);

/// Kernel spec: {"type": "separable", "bodies": [ids]} or
/// {"type": "harmonic-table", "entries": [{"members": ["l:i", ...], "coefficient": c}]}.
KernelValuation valuation_from_json(const nlohmann::json& kernel, const std::map<std::string, ConvexBody>& bodies,
                                    int n, int k, Parity parity);

/// Ellipsoids I + G G^T (G Gaussian, scale 0.3) shifted by a Gaussian vector, every
/// third one replaced by a certified perturbed ball.
std::vector<ConvexBody> random_smooth_bodies(int n, int count, unsigned seed);

/// "start:stop:count" (count optional, default 1 when start == stop).
struct SweepSpec {
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
};
SweepSpec parse_sweep(const std::string& s);

CommandResult cmd_spanning_check(const ExperimentConfig& cfg);
CommandResult cmd_mixed_volume(const ExperimentConfig& cfg);
CommandResult cmd_steiner(const ExperimentConfig& cfg);
/// Degrees 0 and n, which the synthesis pipeline excludes: Euler characteristic and volume.
CommandResult cmd_volume(const ExperimentConfig& cfg);
CommandResult cmd_synthesize(const ExperimentConfig& cfg);
CommandResult cmd_verify(const ExperimentConfig& cfg);
CommandResult cmd_counterexample(const ExperimentConfig& cfg);

/// Dispatches on cfg.command and maps exceptions to exit codes.
CommandResult run_command(const ExperimentConfig& cfg);

}  // namespace valforge
