#include "valforge/commands.hpp"
#include "valforge/errors.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace valforge;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"valforge: mixed volumes, kernel valuations and the counterexample lab"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, artifact_path, bodies_path, eps_sweep, out;
  std::optional<int> n, k, degree;
  std::optional<double> tol;
  std::optional<unsigned> seed;
  bool all_balls = false;

  app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--n", n, "ambient dimension");
  app.add_option("--k", k, "homogeneity degree");
  app.add_option("--degree", degree, "sphere grid degree");
  app.add_option("--tol", tol, "tolerance for the command's check");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out, "directory for output files");

  auto* spanning = app.add_subcommand("spanning-check", "certify the ellipsoid family on a grid");
  spanning->add_flag("--all-balls", all_balls, "use a degenerate family (negative control)");
  app.add_subcommand("mixed-volume", "mixed volumes by every applicable route");
  app.add_subcommand("steiner", "Steiner coefficients of the configured bodies");
  app.add_subcommand("volume", "Euler characteristic and volume (degrees 0 and n)");
  app.add_subcommand("synthesize", "kernel valuation to a finite mixed-volume combination");
  auto* verify = app.add_subcommand("verify", "compare an artifact against its kernel valuation");
  verify->add_option("--artifact", artifact_path, "combination JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--bodies", bodies_path, "bodies JSON {id: body}")->required()->check(CLI::ExistingFile);
  auto* counter = app.add_subcommand("counterexample", "divergence sweep of the singular moment");
  counter->add_option("--eps-sweep", eps_sweep, "start:stop:count, log-spaced");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::input_error;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = config_from_json(read_json(config_path));
    cfg.command = app.get_subcommands().front()->get_name();
    if (n) cfg.n = *n;
    if (k) cfg.k = *k;
    if (degree) cfg.degree = *degree;
    if (tol) cfg.tol = *tol;
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    if (!eps_sweep.empty()) cfg.eps_sweep = eps_sweep;
    cfg.all_balls = all_balls;
    if (cfg.command == "verify") {
      cfg.artifact = read_json(artifact_path);
      cfg.bodies = read_json(bodies_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_code::input_error;
  }

  const CommandResult r = run_command(cfg);
  std::cout << r.output;
  std::cerr << r.message;
  if (!cfg.out.empty() && !r.files.empty()) {
    std::filesystem::create_directories(cfg.out);
    for (const auto& [name, content] : r.files) std::ofstream(std::filesystem::path(cfg.out) / name) << content;
  }
  return r.exit_code;
}
