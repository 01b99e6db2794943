#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dodwda/demand_response.hpp"
#include "dodwda/errors.hpp"
#include "dodwda/oco.hpp"
#include "dodwda/regret.hpp"
#include "dodwda/rng.hpp"
#include "dodwda/topology.hpp"

namespace dodwda::sim {

struct NetworkSpec {
  enum class Kind { ring, explicit_rows };
  Kind kind = Kind::ring;
  double self_weight = 1.0 / 3.0;
  std::vector<std::vector<double>> rows;  // explicit only
};

struct BuildingsSpec {
  enum class Kind { sampled, explicit_list };
  Kind kind = Kind::sampled;
  // sampled: the first `small_count` buildings get a symmetric box with a
  // magnitude from small_magnitude; the rest draw upper and lower bounds
  // from large_upper / large_lower.
  int small_count = 2;
  double small_magnitude_lo = 0.5, small_magnitude_hi = 0.75;
  double large_upper_lo = 2.0, large_upper_hi = 3.0;
  double large_lower_lo = -3.0, large_lower_hi = -2.0;
  std::optional<std::uint64_t> seed;
  std::vector<dr::Building> list;  // explicit only
};

struct SetpointSpec {
  double sigma = 2.0;
  double s0 = 0.0;
  std::optional<std::uint64_t> seed;
};

enum class VirtualSplit { uniform, proportional };

struct ScenarioConfig {
  int n = 0;
  int rounds = 0;  // T
  double beta = 0.0;
  std::uint64_t seed = 0;
  double round_seconds = 4.0;  // metadata only; the run is round-indexed
  std::string psi = "quadratic";
  int mixing_horizon = 0;  // 0 = max(2n, 64)
  NetworkSpec network;
  BuildingsSpec buildings;
  SetpointSpec setpoint;
  VirtualSplit virtual_split = VirtualSplit::uniform;
  regret::AbsoluteRegretScaling absolute_regret_scaling =
      regret::AbsoluteRegretScaling::mean;
  std::string output_dir = "out";

  int effective_mixing_horizon() const {
    return mixing_horizon > 0 ? mixing_horizon : std::max(2 * n, 64);
  }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const char* where,
                                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) known = true;
    if (!known)
      throw config_error(std::string("unknown key \"") + it.key() + "\" in " +
                         where);
  }
}

template <typename T>
T require_field(const json& obj, const char* where, const char* key) {
  if (!obj.contains(key))
    throw config_error(std::string("missing required key \"") + key + "\" in " +
                       where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad value for \"") + key + "\" in " + where +
                       ": " + e.what());
  }
}

template <typename T>
T optional_field(const json& obj, const char* where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad value for \"") + key + "\" in " + where +
                       ": " + e.what());
  }
}

inline std::pair<double, double> range_field(const json& obj, const char* where,
                                             const char* key, double lo,
                                             double hi) {
  if (!obj.contains(key)) return {lo, hi};
  auto arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 2)
    throw config_error(std::string("\"") + key + "\" in " + where +
                       " must be a [low, high] pair");
  return {arr.at(0).get<double>(), arr.at(1).get<double>()};
}

inline NetworkSpec parse_network(const json& obj, int top_n) {
  NetworkSpec spec;
  std::string kind = require_field<std::string>(obj, "network", "kind");
  if (kind == "ring") {
    reject_unknown_keys(obj, "network", {"kind", "n", "self_weight"});
    spec.kind = NetworkSpec::Kind::ring;
    spec.self_weight =
        optional_field<double>(obj, "network", "self_weight", 1.0 / 3.0);
    int ring_n = optional_field<int>(obj, "network", "n", top_n);
    if (ring_n != top_n)
      throw config_error("network.n = " + std::to_string(ring_n) +
                         " disagrees with the top-level n = " +
                         std::to_string(top_n));
  } else if (kind == "explicit") {
    reject_unknown_keys(obj, "network", {"kind", "rows"});
    spec.kind = NetworkSpec::Kind::explicit_rows;
    spec.rows = require_field<std::vector<std::vector<double>>>(obj, "network",
                                                                "rows");
  } else {
    throw config_error("network.kind must be \"ring\" or \"explicit\"");
  }
  return spec;
}

inline BuildingsSpec parse_buildings(const json& obj) {
  BuildingsSpec spec;
  std::string kind = require_field<std::string>(obj, "buildings", "kind");
  if (kind == "sampled") {
    reject_unknown_keys(obj, "buildings",
                        {"kind", "small_count", "small_magnitude", "large_upper",
                         "large_lower", "seed"});
    spec.kind = BuildingsSpec::Kind::sampled;
    spec.small_count = optional_field<int>(obj, "buildings", "small_count", 2);
    std::tie(spec.small_magnitude_lo, spec.small_magnitude_hi) =
        range_field(obj, "buildings", "small_magnitude", 0.5, 0.75);
    std::tie(spec.large_upper_lo, spec.large_upper_hi) =
        range_field(obj, "buildings", "large_upper", 2.0, 3.0);
    std::tie(spec.large_lower_lo, spec.large_lower_hi) =
        range_field(obj, "buildings", "large_lower", -3.0, -2.0);
    if (obj.contains("seed"))
      spec.seed = require_field<std::uint64_t>(obj, "buildings", "seed");
  } else if (kind == "explicit") {
    reject_unknown_keys(obj, "buildings", {"kind", "list"});
    spec.kind = BuildingsSpec::Kind::explicit_list;
    if (!obj.contains("list") || !obj.at("list").is_array())
      throw config_error("explicit buildings need a \"list\" array");
    for (const auto& entry : obj.at("list")) {
      reject_unknown_keys(entry, "buildings.list entry", {"a_lo", "a_hi", "c"});
      double a_lo = require_field<double>(entry, "buildings.list entry", "a_lo");
      double a_hi = require_field<double>(entry, "buildings.list entry", "a_hi");
      double c = optional_field<double>(entry, "buildings.list entry", "c", 1.0);
      spec.list.push_back(dr::Building::make(a_lo, a_hi, c));
    }
  } else {
    throw config_error("buildings.kind must be \"sampled\" or \"explicit\"");
  }
  return spec;
}

}  // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& root) {
  using detail::optional_field;
  using detail::require_field;

  if (!root.is_object())
    throw config_error("scenario config must be a JSON object");
  detail::reject_unknown_keys(
      root, "config",
      {"n", "T", "beta", "seed", "round_seconds", "psi", "mixing_horizon",
       "network", "buildings", "setpoint", "virtual_split",
       "absolute_regret_scaling", "output_dir"});

  ScenarioConfig cfg;
  cfg.n = require_field<int>(root, "config", "n");
  cfg.rounds = require_field<int>(root, "config", "T");
  cfg.beta = require_field<double>(root, "config", "beta");
  cfg.seed = optional_field<std::uint64_t>(root, "config", "seed", 0);
  cfg.round_seconds = optional_field<double>(root, "config", "round_seconds", 4.0);
  cfg.psi = optional_field<std::string>(root, "config", "psi", "quadratic");
  cfg.mixing_horizon = optional_field<int>(root, "config", "mixing_horizon", 0);
  cfg.output_dir = optional_field<std::string>(root, "config", "output_dir", "out");

  if (!root.contains("network"))
    throw config_error("missing required key \"network\" in config");
  cfg.network = detail::parse_network(root.at("network"), cfg.n);
  if (!root.contains("buildings"))
    throw config_error("missing required key \"buildings\" in config");
  cfg.buildings = detail::parse_buildings(root.at("buildings"));

  if (root.contains("setpoint")) {
    const auto& sp = root.at("setpoint");
    detail::reject_unknown_keys(sp, "setpoint", {"sigma", "s0", "seed"});
    cfg.setpoint.sigma = optional_field<double>(sp, "setpoint", "sigma", 2.0);
    cfg.setpoint.s0 = optional_field<double>(sp, "setpoint", "s0", 0.0);
    if (sp.contains("seed"))
      cfg.setpoint.seed = require_field<std::uint64_t>(sp, "setpoint", "seed");
  }

  std::string split =
      optional_field<std::string>(root, "config", "virtual_split", "uniform");
  if (split == "uniform")
    cfg.virtual_split = VirtualSplit::uniform;
  else if (split == "proportional")
    cfg.virtual_split = VirtualSplit::proportional;
  else
    throw config_error("virtual_split must be \"uniform\" or \"proportional\"");

  std::string scaling = optional_field<std::string>(
      root, "config", "absolute_regret_scaling", "mean");
  if (scaling == "mean")
    cfg.absolute_regret_scaling = regret::AbsoluteRegretScaling::mean;
  else if (scaling == "sum")
    cfg.absolute_regret_scaling = regret::AbsoluteRegretScaling::sum;
  else
    throw config_error("absolute_regret_scaling must be \"mean\" or \"sum\"");

  // Semantic validation: collect every violation before failing.
  std::vector<std::string> violations;
  if (cfg.n < 3)
    violations.push_back("n = " + std::to_string(cfg.n) +
                         " cannot satisfy the min-degree-2 network assumption; "
                         "need n >= 3");
  if (cfg.rounds < 1) violations.push_back("T must be >= 1");
  if (!(cfg.beta > 0.0)) violations.push_back("beta must be positive");
  if (!(cfg.round_seconds > 0.0))
    violations.push_back("round_seconds must be positive");
  if (cfg.psi != "quadratic")
    violations.push_back("psi must be \"quadratic\" (the only supported tag)");
  if (cfg.mixing_horizon != 0 && cfg.mixing_horizon < 2 * cfg.n)
    violations.push_back("mixing_horizon must be >= 2n when given");
  if (!(cfg.setpoint.sigma > 0.0))
    violations.push_back("setpoint.sigma must be positive");
  if (cfg.network.kind == NetworkSpec::Kind::ring &&
      !(cfg.network.self_weight > 0.0 && cfg.network.self_weight < 1.0))
    violations.push_back("network.self_weight must lie in (0, 1)");
  if (cfg.network.kind == NetworkSpec::Kind::explicit_rows) {
    if (static_cast<int>(cfg.network.rows.size()) != cfg.n)
      violations.push_back("network.rows must have exactly n rows");
    for (const auto& row : cfg.network.rows)
      if (static_cast<int>(row.size()) != cfg.n) {
        violations.push_back("every network row must have exactly n entries");
        break;
      }
  }
  if (cfg.buildings.kind == BuildingsSpec::Kind::sampled) {
    const auto& b = cfg.buildings;
    if (b.small_count < 0 || b.small_count > cfg.n)
      violations.push_back("buildings.small_count must lie in [0, n]");
    if (!(b.small_magnitude_lo > 0.0 && b.small_magnitude_lo <= b.small_magnitude_hi))
      violations.push_back("buildings.small_magnitude must be a positive range");
    if (!(b.large_upper_lo > 0.0 && b.large_upper_lo <= b.large_upper_hi))
      violations.push_back("buildings.large_upper must be a positive range");
    if (!(b.large_lower_hi < 0.0 && b.large_lower_lo <= b.large_lower_hi))
      violations.push_back("buildings.large_lower must be a negative range");
  } else if (static_cast<int>(cfg.buildings.list.size()) != cfg.n) {
    violations.push_back("explicit buildings list must have exactly n entries");
  }

  if (!violations.empty()) {
    std::string message = "invalid scenario config:";
    for (const auto& v : violations) message += "\n  - " + v;
    throw config_error(message);
  }
  return cfg;
}

/// Loads, parses, and validates a scenario file. Unknown keys are
/// rejected so typos fail fast instead of silently using defaults.
inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("parse error in " + path + ": " + e.what());
  }
  return parse_config(root);
}

inline net::NetworkMatrix build_network(const ScenarioConfig& cfg) {
  if (cfg.network.kind == NetworkSpec::Kind::ring)
    return net::build_ring(cfg.n, cfg.network.self_weight);
  net::NetworkMatrix P;
  P.n = cfg.n;
  P.entries.resize(cfg.n, cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.n; ++j)
      P.entries(i, j) = cfg.network.rows[static_cast<std::size_t>(i)]
                                        [static_cast<std::size_t>(j)];
  return P;
}

/// Draws building boxes from the configured capacity bands. Small
/// buildings get symmetric boxes; the capacity stream is independent of
/// the setpoint stream so changing n never perturbs the signal.
inline std::vector<dr::Building> sample_buildings(const ScenarioConfig& cfg,
                                                  std::uint64_t master_seed) {
  if (cfg.buildings.kind == BuildingsSpec::Kind::explicit_list)
    return cfg.buildings.list;

  const auto& spec = cfg.buildings;
  SplitMix64 rng(spec.seed ? *spec.seed
                           : substream(master_seed, "capacities").next_u64());
  std::vector<dr::Building> buildings;
  buildings.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    if (i < spec.small_count) {
      double magnitude = rng.uniform(spec.small_magnitude_lo, spec.small_magnitude_hi);
      buildings.push_back(dr::Building::make(-magnitude, magnitude));
    } else {
      double hi = rng.uniform(spec.large_upper_lo, spec.large_upper_hi);
      double lo = rng.uniform(spec.large_lower_lo, spec.large_lower_hi);
      buildings.push_back(dr::Building::make(lo, hi));
    }
  }
  return buildings;
}

/// Complete record of one scenario run: the engine trace plus the
/// demand-response view, regret curves, and the instantiated bound.
struct ScenarioTrace {
  int agents = 0;
  int rounds = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;

  net::NetworkMatrix network;
  net::StationaryDistribution stationary;
  net::MixingParameters mixing;
  std::vector<dr::Building> buildings;
  dr::DualDomain domain;
  std::vector<double> split_weights;

  std::vector<double> setpoints;  // s_t, rows 0..T
  oco::RunTrace engine;

  std::vector<double> nu_star;                  // rows 0..T
  std::vector<double> f_star;                   // f_t(nu*_t)
  std::vector<Eigen::VectorXd> dispatch_star;   // a*_t
  std::vector<char> round_saturated;            // capacity exceeded at t
  std::vector<std::vector<double>> adjustments; // implemented a_{i,t}, [t][i]

  regret::RegretLedger ledger;
  std::vector<double> cumulative_regret;    // rows 0..T, 0 at t = 0
  std::vector<double> average_abs_regret;   // rows 0..T, 0 at t = 0
  int regret_sign_flags = 0;
  double min_regret_summand = 0.0;

  regret::BoundInputs bound_inputs;
  regret::BoundTerms bound;

  double virtual_setpoint(int agent, int round) const {
    return split_weights[static_cast<std::size_t>(agent)] *
           setpoints[static_cast<std::size_t>(round)];
  }
};

/// Runs a validated scenario end to end. Deterministic for a fixed
/// (config, seed): every random draw comes from labeled substreams of
/// the master seed.
inline ScenarioTrace run_scenario(const ScenarioConfig& cfg,
                                  std::optional<std::uint64_t> seed_override = {}) {
  ScenarioTrace trace;
  trace.agents = cfg.n;
  trace.rounds = cfg.rounds;
  trace.seed = seed_override.value_or(cfg.seed);

  trace.network = build_network(cfg);
  net::require_valid(trace.network);
  trace.stationary = net::stationary_distribution(trace.network);
  trace.mixing = net::estimate_mixing(trace.network, trace.stationary,
                                      cfg.effective_mixing_horizon());

  trace.buildings = sample_buildings(cfg, trace.seed);
  trace.domain = dr::dual_domain_for(trace.buildings);

  dr::SetpointProcess process;
  process.sigma = cfg.setpoint.sigma;
  process.s0 = cfg.setpoint.s0;
  process.seed = cfg.setpoint.seed ? *cfg.setpoint.seed
                                   : substream(trace.seed, "setpoint").next_u64();
  trace.setpoints = dr::setpoint_path(process, cfg.rounds);

  trace.split_weights = cfg.virtual_split == VirtualSplit::uniform
                            ? dr::uniform_split(cfg.n)
                            : dr::proportional_split(trace.buildings);

  oco::LossOracle oracle =
      dr::build_dr_oracle(trace.buildings, trace.setpoints, trace.split_weights);
  oco::EngineConfig engine_cfg = oco::EngineConfig::make(cfg.beta, cfg.rounds);
  trace.alpha = engine_cfg.alpha;
  oco::DecisionSet X =
      oco::DecisionSet::interval(trace.domain.nu_lo, trace.domain.nu_hi);
  trace.engine = oco::run(engine_cfg, trace.network, trace.stationary.pi,
                          oco::ProximalFunction::quadratic(), X, oracle, cfg.n);

  const int T = cfg.rounds;
  trace.nu_star.resize(T + 1);
  trace.f_star.resize(T + 1);
  trace.dispatch_star.resize(T + 1);
  trace.round_saturated.resize(T + 1);
  trace.adjustments.assign(T + 1, std::vector<double>(cfg.n, 0.0));
  trace.ledger.agents = cfg.n;
  trace.ledger.rounds = T;
  trace.ledger.agent_losses = trace.engine.losses;
  trace.ledger.optimal_value.resize(T + 1);
  trace.ledger.optimizer.resize(T + 1);

  for (int t = 0; t <= T; ++t) {
    dr::Dispatch dispatch =
        dr::solve_dispatch(trace.setpoints[t], trace.buildings, trace.domain);
    trace.nu_star[t] = dispatch.nu;
    trace.dispatch_star[t] = dispatch.adjustments;
    trace.round_saturated[t] = dispatch.saturated ? 1 : 0;

    double f_star = 0.0;
    for (int i = 0; i < cfg.n; ++i)
      f_star += dr::local_dual_loss(dispatch.nu, trace.buildings[i],
                                    trace.virtual_setpoint(i, t));
    trace.f_star[t] = f_star / cfg.n;
    trace.ledger.optimal_value[t] = trace.f_star[t];
    Eigen::VectorXd opt(1);
    opt << dispatch.nu;
    trace.ledger.optimizer[t] = opt;

    for (int i = 0; i < cfg.n; ++i)
      trace.adjustments[t][i] =
          dr::primal_recovery(trace.engine.decisions[t][i](0), trace.buildings[i]);
  }

  regret::RegretTerms terms = regret::network_regret_terms(trace.ledger);
  trace.regret_sign_flags = terms.flagged;
  trace.min_regret_summand = terms.min_summand;
  trace.cumulative_regret.assign(T + 1, 0.0);
  trace.average_abs_regret.assign(T + 1, 0.0);
  double cum = 0.0, abs_cum = 0.0;
  for (int t = 1; t <= T; ++t) {
    cum += terms.summands[t - 1];
    trace.cumulative_regret[t] = cum;
    double played = 0.0;
    for (int i = 0; i < cfg.n; ++i) played += trace.ledger.agent_losses[t][i];
    if (cfg.absolute_regret_scaling == regret::AbsoluteRegretScaling::mean)
      played /= cfg.n;
    abs_cum += std::abs(played - trace.f_star[t]);
    trace.average_abs_regret[t] = abs_cum / t;
  }

  std::vector<Eigen::VectorXd> regret_optima(trace.ledger.optimizer.begin() + 1,
                                             trace.ledger.optimizer.end());
  trace.bound_inputs.lipschitz = oracle.lipschitz;
  trace.bound_inputs.agents = cfg.n;
  trace.bound_inputs.p_max = trace.mixing.p_max;
  trace.bound_inputs.gamma = trace.mixing.gamma;
  trace.bound_inputs.nu = trace.mixing.nu;
  trace.bound_inputs.preimage_bound =
      regret::estimate_preimage_bound(trace.ledger.optimizer, trace.alpha);
  trace.bound_inputs.beta = cfg.beta;
  trace.bound_inputs.path_length = regret::path_length(regret_optima);
  trace.bound = regret::theorem_bound_terms(trace.bound_inputs);

  return trace;
}

}  // namespace dodwda::sim
