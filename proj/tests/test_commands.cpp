#include "doctest.h"

#include "valforge/commands.hpp"

#include <cmath>
#include <sstream>

using namespace valforge;
using nlohmann::json;

namespace {

ExperimentConfig config(const std::string& command, json raw = json::object()) {
  ExperimentConfig cfg = config_from_json(raw);
  cfg.command = command;
  return cfg;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

json ellipsoid(double a, double b, double c) {
  return {{"kind", "ellipsoid"}, {"matrix", {{a, 0.0, 0.0}, {0.0, b, 0.0}, {0.0, 0.0, c}}}};
}

}  // namespace

TEST_CASE("spanning-check reports") {
  const CommandResult three = run_command(config("spanning-check", {{"n", 3}, {"degree", 20}}));
  CHECK(three.exit_code == exit_code::ok);
  const json r3 = json::parse(three.output);
  CHECK(r3["t"] == 7.0);
  CHECK(r3["N"] == 7);
  CHECK(r3["c"].get<double>() == doctest::Approx(1.0 / 3.0));
  CHECK(r3["min_sigma"].get<double>() > 0.0);

  const json r2 = json::parse(run_command(config("spanning-check", {{"n", 2}})).output);
  CHECK(r2["t"] == 5.0);
  CHECK(r2["N"] == 4);

  ExperimentConfig balls = config("spanning-check");
  balls.all_balls = true;
  const CommandResult bad = run_command(balls);
  CHECK(bad.exit_code == exit_code::math_failure);
  CHECK(json::parse(bad.output)["spans"] == false);
}

TEST_CASE("mixed-volume table") {
  json raw{{"bodies", {{"B", {{"kind", "ball"}, {"radius", 1.0}}}, {"E", ellipsoid(2.0, 1.0, 0.5)}}},
           {"tuples", {{"B", "B", "B"}, {"E", "B", "E"}}}};
  const CommandResult r = run_command(config("mixed-volume", raw));
  REQUIRE(r.exit_code == exit_code::ok);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"tuple", "quadrature", "polynomial", "spread"});
  CHECK(std::stod(rows[1][1]) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-10));
  CHECK(std::stod(rows[1][3]) < 1e-3);
  CHECK(std::stod(rows[2][3]) < 1e-3 * std::stod(rows[2][1]));

  raw["bodies"]["B"] = {{"kind", "ball"}};
  CHECK(run_command(config("mixed-volume", raw)).exit_code == exit_code::input_error);
  raw["bodies"]["B"] = {{"kind", "ball"}, {"radius", 1.0}};
  raw["tuples"] = {{"B", "B"}};
  CHECK(run_command(config("mixed-volume", raw)).exit_code == exit_code::input_error);
  CHECK(run_command(config("no-such-command")).exit_code == exit_code::input_error);
}

TEST_CASE("steiner table") {
  json raw{{"bodies", {{"B", {{"kind", "ball"}, {"radius", 1.0}}}}}};
  const CommandResult r = run_command(config("steiner", raw));
  REQUIRE(r.exit_code == exit_code::ok);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 5);
  CHECK(std::stod(rows[4][2]) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-8));
}

TEST_CASE("degree 0 and n evaluators") {
  json raw{{"bodies", {{"B", {{"kind", "ball"}, {"radius", 2.0}}},
                       {"C", {{"kind", "polytope"}, {"vertices", {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {2, 2, 0},
                                                                  {0, 0, 2}, {2, 0, 2}, {0, 2, 2}, {2, 2, 2}}}}}}}};
  const CommandResult r = run_command(config("volume", raw));
  REQUIRE(r.exit_code == exit_code::ok);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][1] == "1");
  CHECK(std::stod(rows[1][2]) == doctest::Approx(32.0 * M_PI / 3.0).epsilon(1e-10));
  CHECK(std::stod(rows[2][2]) == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("synthesize and verify") {
  json raw{{"n", 3},
           {"k", 2},
           {"bodies", {{"E", ellipsoid(2.0, 1.0, 1.0)}}},
           {"kernel", {{"type", "separable"}, {"bodies", {"E"}}}},
           {"random_test_bodies", 4},
           {"seed", 11}};
  const CommandResult r = run_command(config("synthesize", raw));
  REQUIRE(r.exit_code == exit_code::ok);
  const json artifact = json::parse(r.output);
  CHECK(artifact["mixed_volume_count"] == 2);
  REQUIRE(r.files.size() == 2);
  const auto verified = csv_rows(r.files[1].second);
  REQUIRE(verified.size() == 5);
  for (std::size_t i = 1; i < verified.size(); ++i) CHECK(std::stod(verified[i][3]) <= 1e-2);

  ExperimentConfig v = config("verify");
  v.artifact = artifact;
  v.bodies = {{"ball", {{"kind", "ball"}, {"radius", 2.0}}}, {"flat", ellipsoid(3.0, 1.0, 0.25)}};
  const CommandResult checked = run_command(v);
  CHECK(checked.exit_code == exit_code::ok);
  CHECK(csv_rows(checked.output).size() == 3);

  v.bodies = {{"cube", {{"kind", "polytope"}, {"vertices", {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}}};
  CHECK(run_command(v).exit_code == exit_code::input_error);

  raw["kernel"]["bodies"] = {"E", "E"};
  CHECK(run_command(config("synthesize", raw)).exit_code == exit_code::input_error);
  raw["k"] = 1;
  raw["random_test_bodies"] = 2;
  const CommandResult k1 = run_command(config("synthesize", raw));
  CHECK(k1.exit_code == exit_code::ok);
  CHECK(json::parse(k1.output)["mixed_volume_count"].get<int>() <= 14);
}

TEST_CASE("counterexample sweep") {
  ExperimentConfig cfg = config("counterexample");
  const CommandResult r = run_command(cfg);
  CHECK(r.exit_code == exit_code::ok);
  const auto rows = csv_rows(r.output);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "true");
  CHECK(r.files.size() == 2);

  cfg.eps_sweep = "1e-4";
  const auto single = csv_rows(run_command(cfg).output);
  REQUIRE(single.size() == 2);
  CHECK(std::stod(single[1][1]) >= 100.0);

  cfg.eps_sweep = "1e-2:abc";
  CHECK(run_command(cfg).exit_code == exit_code::input_error);
  cfg.eps_sweep = "0.2";
  CHECK(run_command(cfg).exit_code == exit_code::input_error);
}
