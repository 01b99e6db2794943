// Command-line front end: run scenarios, validate networks, evaluate the
// regret bound, and solve one-shot centralized dispatches.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dodwda/dodwda.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::string fmt(double v) { return dodwda::sim::format_double(v); }

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir) {
  dodwda::sim::ScenarioConfig cfg = dodwda::sim::load_config(config_path);
  if (out_dir) cfg.output_dir = *out_dir;

  dodwda::sim::ScenarioTrace trace = dodwda::sim::run_scenario(cfg, seed);
  std::filesystem::create_directories(cfg.output_dir);
  std::string csv_path = cfg.output_dir + "/trace.csv";
  dodwda::sim::write_csv(trace, csv_path);
  auto charts = dodwda::sim::render_plots(trace, cfg.output_dir);

  std::cout << "seed " << trace.seed << ", T = " << trace.rounds << ", n = "
            << trace.agents << "\n";
  std::cout << "wrote " << csv_path << "\n";
  for (const auto& f : charts) std::cout << "wrote " << f << "\n";
  std::cout << "cumulative network regret at T: "
            << fmt(trace.cumulative_regret[trace.rounds]) << "\n";
  std::cout << "average absolute regret at T:   "
            << fmt(trace.average_abs_regret[trace.rounds]) << "\n";
  std::cout << "regret bound:                   " << fmt(trace.bound.total)
            << "\n";
  if (trace.regret_sign_flags > 0)
    std::cout << "note: " << trace.regret_sign_flags
              << " regret summand(s) below -1e-9 (min "
              << fmt(trace.min_regret_summand) << ")\n";
  return kExitOk;
}

int cmd_validate_network(const std::string& config_path) {
  dodwda::sim::ScenarioConfig cfg = dodwda::sim::load_config(config_path);
  dodwda::net::NetworkMatrix P = dodwda::sim::build_network(cfg);
  dodwda::net::ValidationReport report = dodwda::net::validate(P);
  for (const auto& check : report.checks)
    std::cout << (check.passed ? "  pass  " : "  FAIL  ") << check.name
              << (check.detail.empty() ? "" : "  (" + check.detail + ")")
              << "\n";
  if (!report.all_passed()) {
    std::cerr << "network rejected: failed checks: " << report.failed_names()
              << "\n";
    return kExitValidation;
  }
  std::cout << "network satisfies all gossip assumptions\n";
  return kExitOk;
}

int cmd_bound(const std::string& config_path, std::optional<double> vt_override) {
  dodwda::sim::ScenarioConfig cfg = dodwda::sim::load_config(config_path);

  // The bound constants need the realized setpoint path (for L), the
  // fitted mixing parameters, and the centralized optima (for Y and V_T);
  // none of that requires running the distributed updates.
  dodwda::net::NetworkMatrix P = dodwda::sim::build_network(cfg);
  dodwda::net::require_valid(P);
  auto pi = dodwda::net::stationary_distribution(P);
  auto mixing =
      dodwda::net::estimate_mixing(P, pi, cfg.effective_mixing_horizon());

  auto buildings = dodwda::sim::sample_buildings(cfg, cfg.seed);
  auto domain = dodwda::dr::dual_domain_for(buildings);
  dodwda::dr::SetpointProcess process;
  process.sigma = cfg.setpoint.sigma;
  process.s0 = cfg.setpoint.s0;
  process.seed = cfg.setpoint.seed
                     ? *cfg.setpoint.seed
                     : dodwda::substream(cfg.seed, "setpoint").next_u64();
  auto setpoints = dodwda::dr::setpoint_path(process, cfg.rounds);
  auto split = cfg.virtual_split == dodwda::sim::VirtualSplit::uniform
                   ? dodwda::dr::uniform_split(cfg.n)
                   : dodwda::dr::proportional_split(buildings);
  auto oracle = dodwda::dr::build_dr_oracle(buildings, setpoints, split);

  std::vector<Eigen::VectorXd> optima;
  for (int t = 0; t <= cfg.rounds; ++t) {
    auto dispatch = dodwda::dr::solve_dispatch(setpoints[t], buildings, domain);
    Eigen::VectorXd v(1);
    v << dispatch.nu;
    optima.push_back(v);
  }
  double alpha = dodwda::oco::EngineConfig::make(cfg.beta, cfg.rounds).alpha;

  dodwda::regret::BoundInputs inputs;
  inputs.lipschitz = oracle.lipschitz;
  inputs.agents = cfg.n;
  inputs.p_max = mixing.p_max;
  inputs.gamma = mixing.gamma;
  inputs.nu = mixing.nu;
  inputs.preimage_bound = dodwda::regret::estimate_preimage_bound(optima, alpha);
  inputs.beta = cfg.beta;
  inputs.path_length = vt_override.value_or(dodwda::regret::path_length(
      {optima.begin() + 1, optima.end()}));

  auto terms = dodwda::regret::theorem_bound_terms(inputs);
  std::cout << "inputs: L = " << fmt(inputs.lipschitz) << ", n = " << inputs.agents
            << ", p = " << fmt(inputs.p_max) << ", gamma = " << fmt(inputs.gamma)
            << ", nu = " << inputs.nu << ", Y = " << fmt(inputs.preimage_bound)
            << ", beta = " << fmt(inputs.beta) << ", V_T = "
            << fmt(inputs.path_length) << "\n";
  std::cout << "consensus term:  " << fmt(terms.consensus) << "\n";
  std::cout << "projection term: " << fmt(terms.projection) << "\n";
  std::cout << "path term:       " << fmt(terms.path) << "\n";
  std::cout << "bound:           " << fmt(terms.total) << "\n";
  return kExitOk;
}

int cmd_oracle(double setpoint, const std::string& buildings_path) {
  std::ifstream in(buildings_path);
  if (!in)
    throw dodwda::config_error("cannot open buildings file: " + buildings_path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw dodwda::config_error("parse error in " + buildings_path + ": " +
                               e.what());
  }
  const nlohmann::json& list = root.is_array() ? root : root.at("buildings");
  std::vector<dodwda::dr::Building> buildings;
  for (const auto& entry : list)
    buildings.push_back(dodwda::dr::Building::make(
        entry.at("a_lo").get<double>(), entry.at("a_hi").get<double>(),
        entry.contains("c") ? entry.at("c").get<double>() : 1.0));

  auto dispatch = dodwda::dr::centralized_oracle(setpoint, buildings);
  std::cout << "nu_star = " << fmt(dispatch.nu) << "\n";
  for (Eigen::Index i = 0; i < dispatch.adjustments.size(); ++i)
    std::cout << "a_" << (i + 1) << " = " << fmt(dispatch.adjustments(i))
              << "\n";
  std::cout << "sum = " << fmt(dispatch.adjustments.sum()) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed online dual-averaging demand-response simulator"};
  app.require_subcommand(1);

  std::string config_path, buildings_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> vt_override;
  double setpoint = 0.0;

  CLI::App* run = app.add_subcommand("run", "simulate a scenario end to end");
  run->add_option("config", config_path, "scenario JSON file")->required();
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_value, "override the master seed");
  std::string out_value;
  CLI::Option* out_opt =
      run->add_option("--out", out_value, "override the output directory");

  CLI::App* validate = app.add_subcommand(
      "validate-network", "check a config's network against the assumptions");
  validate->add_option("config", config_path, "scenario JSON file")->required();

  CLI::App* bound = app.add_subcommand(
      "bound", "evaluate the dynamic regret bound for a scenario");
  bound->add_option("config", config_path, "scenario JSON file")->required();
  double vt_value = 0.0;
  CLI::Option* vt_opt =
      bound->add_option("--vt", vt_value, "override the path length V_T");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "one-shot centralized dispatch for a setpoint");
  oracle->add_option("--setpoint", setpoint, "setpoint to dispatch (kW)")
      ->required();
  oracle->add_option("--buildings", buildings_path, "buildings JSON file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (*seed_opt) seed = seed_value;
  if (*out_opt) out_dir = out_value;
  if (*vt_opt) vt_override = vt_value;

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_dir);
    if (validate->parsed()) return cmd_validate_network(config_path);
    if (bound->parsed()) return cmd_bound(config_path, vt_override);
    if (oracle->parsed()) return cmd_oracle(setpoint, buildings_path);
  } catch (const dodwda::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const dodwda::invalid_topology_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
