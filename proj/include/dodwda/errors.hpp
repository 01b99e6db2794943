#pragma once

#include <stdexcept>
#include <string>

namespace dodwda {

/// Base class for all library errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A network matrix violates one of the gossip-network assumptions.
struct invalid_topology_error : error {
  using error::error;
};

/// An iterative numeric routine failed to reach its target residual.
struct numeric_failure_error : error {
  using error::error;
};

/// No geometric mixing envelope with rate < 1 could be fitted.
struct mixing_estimation_error : error {
  using error::error;
};

/// A caller broke a documented precondition (dimension mismatch,
/// missing rounds, out-of-range query, ...).
struct contract_violation_error : error {
  using error::error;
};

/// Bound evaluation was asked for parameters outside its domain.
struct invalid_inputs_error : error {
  using error::error;
};

/// A loss oracle threw while the engine was running; carries the round.
struct oracle_failure_error : error {
  oracle_failure_error(int round, int agent, const std::string& what_arg)
      : error("oracle failure at round " + std::to_string(round) + ", agent " +
              std::to_string(agent) + ": " + what_arg),
        round(round),
        agent(agent) {}
  int round;
  int agent;
};

/// The requested setpoint lies outside the aggregate capacity.
struct infeasibility_error : error {
  infeasibility_error(double setpoint, double lo, double hi)
      : error("setpoint " + std::to_string(setpoint) +
              " outside feasible interval [" + std::to_string(lo) + ", " +
              std::to_string(hi) + "]"),
        setpoint(setpoint),
        feasible_lo(lo),
        feasible_hi(hi) {}
  double setpoint;
  double feasible_lo;
  double feasible_hi;
};

/// Scenario configuration failed to parse or validate.
struct config_error : error {
  using error::error;
};

}  // namespace dodwda
