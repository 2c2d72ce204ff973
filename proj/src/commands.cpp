#include "valforge/commands.hpp"

#include "valforge/errors.hpp"
#include "valforge/format.hpp"
#include "valforge/gw.hpp"
#include "valforge/mixed.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace valforge {

using nlohmann::json;

namespace {

int require_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw InvalidArgument(std::string("config: \"") + key + "\" must be an integer");
  return j.at(key).get<int>();
}

double require_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw InvalidArgument(std::string("config: \"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

void check_dims(const ExperimentConfig& cfg) {
  if (cfg.n < 2) throw InvalidArgument("n must be >= 2");
  if (cfg.degree < 1) throw InvalidArgument("degree must be >= 1");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be positive");
}

const json& require_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("config: missing \"") + key + "\"");
  return j.at(key);
}

Parity parity_of(const json& raw) {
  return raw.contains("parity") ? parse_parity(raw.at("parity").get<std::string>()) : Parity::none;
}

std::string verification_csv(const KernelValuation& v, const FiniteCombination& comb,
                             const std::vector<std::pair<std::string, ConvexBody>>& bodies, const SphereGrid& grid,
                             double& max_error) {
  std::ostringstream os;
  os << "body_id,kernel_value,combination_value,relative_error\n";
  max_error = 0.0;
  for (const auto& [id, body] : bodies) {
    const double expect = evaluate_kernel_valuation(v, body, grid);
    const double got = evaluate_combination(comb, body, grid).value;
    const double err = std::abs(got - expect) / std::max(std::abs(expect), 1e-300);
    max_error = std::max(max_error, err);
    os << id << ',' << format_double(expect) << ',' << format_double(got) << ',' << format_double(err) << '\n';
  }
  return os.str();
}

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  base.raw = j;
  if (j.contains("command")) base.command = j.at("command").get<std::string>();
  base.n = require_int(j, "n", base.n);
  base.k = require_int(j, "k", base.k);
  base.degree = require_int(j, "degree", base.degree);
  base.tol = require_number(j, "tol", base.tol);
  if (j.contains("seed")) base.seed = static_cast<unsigned>(require_int(j, "seed", 0));
  if (j.contains("out")) base.out = j.at("out").get<std::string>();
  if (j.contains("eps_sweep")) base.eps_sweep = j.at("eps_sweep").get<std::string>();
  return base;
}

std::map<std::string, ConvexBody> bodies_from_json(const json& j, int n) {
  if (!j.is_object()) throw InvalidArgument("bodies: expected an object of id -> body");
  std::map<std::string, ConvexBody> out;
  for (const auto& [id, body] : j.items()) {
    out.emplace(id, body_from_json(body, n));
    if (out.at(id).dimension() != n) throw InvalidArgument("bodies: \"" + id + "\" has the wrong dimension");
  }
  return out;
}

KernelValuation valuation_from_json(const json& kernel, const std::map<std::string, ConvexBody>& bodies, int n, int k,
                                    Parity parity) {
  const std::string type = require_field(kernel, "type").get<std::string>();
  const int factors = n - k;
  KernelValuation v{n, k, {}, parity};
  if (type == "separable") {
    std::vector<SphericalFunction> fs;
    for (const auto& id : require_field(kernel, "bodies")) {
      const auto it = bodies.find(id.get<std::string>());
      if (it == bodies.end()) throw InvalidArgument("kernel: unknown body id " + id.dump());
      fs.push_back(it->second.support());
    }
    if (static_cast<int>(fs.size()) != factors)
      throw InvalidArgument("kernel: separable kernel needs n - k = " + std::to_string(factors) + " bodies");
    v.decomposition = separable_decomposition(std::move(fs));
  } else if (type == "harmonic-table") {
    std::vector<std::pair<std::vector<std::string>, double>> entries;
    for (const auto& e : require_field(kernel, "entries"))
      entries.emplace_back(require_field(e, "members").get<std::vector<std::string>>(),
                           require_field(e, "coefficient").get<double>());
    v.decomposition = decomposition_from_table(n, factors, entries);
  } else {
    throw InvalidArgument("kernel: unknown type \"" + type + "\"");
  }
  validate(v);
  return v;
}

std::vector<ConvexBody> random_smooth_bodies(int n, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  const SphereGrid certify = build_grid(n, 12);
  const auto dict = HarmonicDictionary::get(n, 3);
  std::vector<ConvexBody> out;
  while (static_cast<int>(out.size()) < count) {
    Vec shift(n);
    for (int i = 0; i < n; ++i) shift(i) = 0.2 * gauss(rng);
    if (out.size() % 3 == 2) {
      std::map<std::string, double> coeffs;
      for (std::size_t i = dict->count_up_to(1); i < dict->count_up_to(3); ++i)
        coeffs[dict->key(i)] = 0.04 * gauss(rng);
      try {
        out.push_back(make_perturbed_ball(1.0, coeffs, certify, n, shift));
      } catch (const ConvexityViolation&) {
      }
      continue;
    }
    Mat g(n, n);
    for (int i = 0; i < n * n; ++i) g(i) = 0.3 * gauss(rng);
    out.push_back(make_ellipsoid(Mat::Identity(n, n) + g * g.transpose(), shift));
  }
  return out;
}

SweepSpec parse_sweep(const std::string& s) {
  SweepSpec spec;
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty() || parts.size() > 3) throw InvalidArgument("eps sweep: expected start[:stop[:count]]");
  try {
    spec.start = std::stod(parts[0]);
    spec.stop = parts.size() > 1 ? std::stod(parts[1]) : spec.start;
    spec.count = parts.size() > 2 ? std::stoi(parts[2]) : (spec.start == spec.stop ? 1 : 2);
  } catch (const std::logic_error&) {
    throw InvalidArgument("eps sweep: cannot parse \"" + s + "\"");
  }
  if (!(spec.start > 0.0) || !(spec.stop > 0.0) || spec.count < 1)
    throw InvalidArgument("eps sweep: endpoints must be positive and count >= 1");
  return spec;
}

CommandResult cmd_spanning_check(const ExperimentConfig& cfg) {
  check_dims(cfg);
  const EllipsoidFamily family = cfg.all_balls ? degenerate_ball_family(cfg.n) : build_family(cfg.n);
  const SphereGrid grid = build_grid(cfg.n, cfg.degree);
  json report{{"t", family.t}, {"c", family.c}, {"N", family.size()}, {"n", cfg.n}, {"grid_nodes", grid.size()}};
  CommandResult r;
  try {
    const SpanningCertificate cert = spanning_certificate(family, grid);
    report["min_sigma"] = cert.min_sigma;
    report["argmin_node"] = cert.argmin_node;
    report["spans"] = true;
  } catch (const SpanningFailure& e) {
    report["min_sigma"] = e.sigma();
    report["argmin_node"] = e.node();
    report["spans"] = false;
    r.exit_code = exit_code::math_failure;
    r.message = std::string(e.what()) + "\n";
  }
  r.output = report.dump(2) + "\n";
  r.files.emplace_back("spanning.json", r.output);
  return r;
}

CommandResult cmd_mixed_volume(const ExperimentConfig& cfg) {
  check_dims(cfg);
  const auto bodies = bodies_from_json(require_field(cfg.raw, "bodies"), cfg.n);
  PolynomialRouteOptions opts;
  opts.level = require_int(cfg.raw, "level", opts.level);
  const SphereGrid grid = build_grid(cfg.n, cfg.degree);

  std::ostringstream os;
  os << "tuple,quadrature,polynomial,spread\n";
  int index = 0;
  for (const auto& tuple : require_field(cfg.raw, "tuples")) {
    std::vector<ConvexBody> list;
    std::string name;
    for (const auto& id : tuple) {
      const auto it = bodies.find(id.get<std::string>());
      if (it == bodies.end()) throw InvalidArgument("tuples: unknown body id " + id.dump());
      list.push_back(it->second);
      name += (name.empty() ? "" : "|") + it->first;
    }
    if (static_cast<int>(list.size()) != cfg.n)
      throw InvalidArgument("tuples: entry " + std::to_string(index) + " must list n bodies");
    std::vector<double> values;
    std::string quad;
    if (std::all_of(list.begin(), list.end(), [](const ConvexBody& b) { return b.is_smooth(); })) {
      const double v = mixed_volume_smooth(list[0], list[1], 1, std::span(list).subspan(2), grid);
      values.push_back(v);
      quad = format_double(v);
    }
    const double poly = polytope_mixed_volume(list, opts);
    values.push_back(poly);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    os << name << ',' << quad << ',' << format_double(poly) << ',' << format_double(*hi - *lo) << '\n';
    ++index;
  }
  CommandResult r;
  r.output = os.str();
  r.files.emplace_back("mixed_volumes.csv", r.output);
  return r;
}

CommandResult cmd_steiner(const ExperimentConfig& cfg) {
  check_dims(cfg);
  const auto bodies = bodies_from_json(require_field(cfg.raw, "bodies"), cfg.n);
  PolynomialRouteOptions opts;
  opts.level = require_int(cfg.raw, "level", opts.level);
  const SphereGrid grid = build_grid(cfg.n, cfg.degree);
  std::vector<SteinerRow> rows;
  CommandResult r;
  for (const auto& [id, body] : bodies) {
    const SteinerPolynomial p = steiner_coefficients(body, grid, opts);
    if (!p.residual_ok) {
      r.exit_code = exit_code::math_failure;
      r.message += "steiner fit residual " + format_double(p.residual) + " for " + id + "\n";
    }
    rows.push_back({id, p.coefficients});
  }
  r.output = steiner_csv(rows);
  r.files.emplace_back("steiner.csv", r.output);
  return r;
}

CommandResult cmd_volume(const ExperimentConfig& cfg) {
  check_dims(cfg);
  const auto bodies = bodies_from_json(require_field(cfg.raw, "bodies"), cfg.n);
  const SphereGrid grid = build_grid(cfg.n, cfg.degree);
  std::ostringstream os;
  os << "body_id,euler_characteristic,volume\n";
  for (const auto& [id, body] : bodies) {
    double vol = 0.0;
    if (body.is_smooth()) {
      vol = mixed_volume_smooth(body, body, cfg.n - 1, {}, grid);
    } else {
      const std::vector<ConvexBody> copies(cfg.n, body);
      vol = polytope_mixed_volume(copies);
    }
    os << id << ",1," << format_double(vol) << '\n';
  }
  CommandResult r;
  r.output = os.str();
  r.files.emplace_back("volume.csv", r.output);
  return r;
}

CommandResult cmd_synthesize(const ExperimentConfig& cfg) {
  check_dims(cfg);
  const json& raw = cfg.raw;
  const json bodies_json = raw.contains("bodies") ? raw.at("bodies") : json::object();
  const auto bodies = bodies_from_json(bodies_json, cfg.n);
  const Parity parity = parity_of(raw);
  const KernelValuation v = valuation_from_json(require_field(raw, "kernel"), bodies, cfg.n, cfg.k, parity);

  const int p = require_int(raw, "projection_degree", default_projection_degree(v));
  const int frame_degree = require_int(raw, "frame_degree", 2 * p + 2);
  const EllipsoidFamily family = build_family(cfg.n);
  const SpanningFrame frame = dual_frame(family, build_grid(cfg.n, frame_degree));
  const FiniteCombination comb = synthesize(v, family, frame, p);

  json artifact = combination_to_json(comb);
  artifact["valuation"] = {{"kernel", raw.at("kernel")}, {"bodies", bodies_json}};

  CommandResult r;
  r.output = artifact.dump(2) + "\n";
  r.files.emplace_back("combination.json", r.output);
  std::ostringstream msg;
  msg << "mixed volumes: " << comb.mixed_volume_count() << " (bound " << comb.mixed_volume_bound() << ")\n";

  std::vector<std::pair<std::string, ConvexBody>> tests;
  if (raw.contains("test_bodies"))
    for (auto& [id, b] : bodies_from_json(raw.at("test_bodies"), cfg.n)) tests.emplace_back(id, b);
  const int random_count = require_int(raw, "random_test_bodies", 0);
  const auto random = random_smooth_bodies(cfg.n, random_count, cfg.seed);
  for (std::size_t i = 0; i < random.size(); ++i) tests.emplace_back("random" + std::to_string(i), random[i]);
  if (!tests.empty()) {
    double max_error = 0.0;
    const std::string csv = verification_csv(v, comb, tests, build_grid(cfg.n, cfg.degree), max_error);
    r.files.emplace_back("verify.csv", csv);
    msg << "max relative error: " << format_double(max_error) << " (tol " << format_double(cfg.tol) << ")\n";
    if (max_error > cfg.tol) r.exit_code = exit_code::math_failure;
  }
  r.message = msg.str();
  return r;
}

CommandResult cmd_verify(const ExperimentConfig& cfg) {
  check_dims(cfg);
  const FiniteCombination comb = combination_from_json(cfg.artifact);
  const json& val = require_field(cfg.artifact, "valuation");
  const auto kernel_bodies = bodies_from_json(val.value("bodies", json::object()), comb.n);
  const KernelValuation v = valuation_from_json(require_field(val, "kernel"), kernel_bodies, comb.n, comb.k, comb.parity);

  std::vector<std::pair<std::string, ConvexBody>> tests;
  for (auto& [id, b] : bodies_from_json(cfg.bodies, comb.n)) {
    if (!b.is_smooth()) throw InvalidArgument("verify: body \"" + id + "\" is not smooth");
    tests.emplace_back(id, b);
  }
  double max_error = 0.0;
  CommandResult r;
  r.output = verification_csv(v, comb, tests, build_grid(comb.n, cfg.degree), max_error);
  r.files.emplace_back("verify.csv", r.output);
  r.message = "max relative error: " + format_double(max_error) + "\n";
  if (max_error > cfg.tol) r.exit_code = exit_code::math_failure;
  return r;
}

CommandResult cmd_counterexample(const ExperimentConfig& cfg) {
  if (cfg.n < 3) throw InvalidArgument("counterexample: n must be >= 3");
  const SweepSpec spec = parse_sweep(cfg.eps_sweep);
  const auto sweep = divergence_sweep(spec.start, spec.stop, spec.count, cfg.n);

  CommandResult r;
  std::ostringstream csv, plot;
  csv << "eps,T,eps_pow_neg_half,pass\n";
  bool all_pass = true;
  for (const auto& p : sweep) {
    csv << format_double(p.eps) << ',' << format_double(p.t_value) << ',' << format_double(p.bound) << ','
        << (p.pass ? "true" : "false") << '\n';
    plot << format_double(std::log(p.eps)) << ' ' << format_double(std::log(p.t_value)) << '\n';
    all_pass = all_pass && p.pass;
  }
  r.output = csv.str();
  r.files.emplace_back("counterexample.csv", r.output);
  r.files.emplace_back("counterexample_plot.txt", plot.str());
  if (sweep.size() >= 2) {
    const double slope = divergence_slope(sweep);
    r.message = "log-log slope: " + format_double(slope) + "\n";
    if (std::abs(slope + 0.5) > 0.05) all_pass = false;
  }
  if (!all_pass) r.exit_code = exit_code::math_failure;
  return r;
}

CommandResult run_command(const ExperimentConfig& cfg) {
  try {
    if (cfg.command == "spanning-check") return cmd_spanning_check(cfg);
    if (cfg.command == "mixed-volume") return cmd_mixed_volume(cfg);
    if (cfg.command == "steiner") return cmd_steiner(cfg);
    if (cfg.command == "volume") return cmd_volume(cfg);
    if (cfg.command == "synthesize") return cmd_synthesize(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    if (cfg.command == "counterexample") return cmd_counterexample(cfg);
    return {exit_code::input_error, "", {}, "unknown command \"" + cfg.command + "\"\n"};
  } catch (const InvalidArgument& e) {
    return {exit_code::input_error, "", {}, std::string("input error: ") + e.what() + "\n"};
  } catch (const json::exception& e) {
    return {exit_code::input_error, "", {}, std::string("input error: ") + e.what() + "\n"};
  } catch (const std::exception& e) {
    return {exit_code::math_failure, "", {}, std::string("failure: ") + e.what() + "\n"};
  }
}

}  // namespace valforge
