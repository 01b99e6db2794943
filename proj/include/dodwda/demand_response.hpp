#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dodwda/errors.hpp"
#include "dodwda/oco.hpp"
#include "dodwda/rng.hpp"

namespace dodwda::dr {

using Vector = Eigen::VectorXd;

/// One flexible load: a box of feasible power adjustments (kW) around
/// nominal consumption and a quadratic discomfort weight.
struct Building {
  double a_lo = 0.0;  // < 0
  double a_hi = 0.0;  // > 0
  double c = 1.0;

  static Building make(double a_lo, double a_hi, double c = 1.0) {
    if (!(a_lo < 0.0 && a_hi > 0.0))
      throw contract_violation_error(
          "building adjustment box must satisfy a_lo < 0 < a_hi");
    if (!(c > 0.0))
      throw contract_violation_error("building cost weight must be positive");
    return Building{a_lo, a_hi, c};
  }

  double capacity() const { return std::max(-a_lo, a_hi); }
};

/// Best box-feasible adjustment for a given price signal:
/// clamp(-nu / 2c) onto [a_lo, a_hi].
inline double primal_recovery(double nu, const Building& b) {
  return std::clamp(-nu / (2.0 * b.c), b.a_lo, b.a_hi);
}

/// Inner minimum of the dual decomposition:
/// Gamma(nu) = min over the box of c a^2 + nu a. Concave in nu.
inline double gamma_i(double nu, const Building& b) {
  double a = primal_recovery(nu, b);
  return b.c * a * a + nu * a;
}

/// Per-building online dual loss -Gamma(nu) + nu s_i. Convex in nu.
inline double local_dual_loss(double nu, const Building& b, double s_i) {
  return -gamma_i(nu, b) + nu * s_i;
}

/// Derivative of the dual loss via the envelope of the inner minimum:
/// s_i - a*(nu). A subgradient everywhere, the gradient wherever the
/// clamp is inactive.
inline double local_dual_gradient(double nu, const Building& b, double s_i) {
  return s_i - primal_recovery(nu, b);
}

/// Random-walk regulation signal s_t = s_{t-1} + sigma (-1)^{b_t} / sqrt(t).
struct SetpointProcess {
  double sigma = 2.0;
  double s0 = 0.0;
  std::uint64_t seed = 0;
};

inline double setpoint_step(double prev_s, int t, double sigma, SplitMix64& rng) {
  if (t < 1) throw contract_violation_error("setpoint steps start at t = 1");
  double sign = rng.bernoulli() ? -1.0 : 1.0;
  return prev_s + sigma * sign / std::sqrt(static_cast<double>(t));
}

/// Realized path s_0..s_T for a seeded process.
inline std::vector<double> setpoint_path(const SetpointProcess& process, int rounds) {
  if (!(process.sigma > 0.0))
    throw contract_violation_error("setpoint sigma must be positive");
  SplitMix64 rng(process.seed);
  std::vector<double> s(rounds + 1);
  s[0] = process.s0;
  for (int t = 1; t <= rounds; ++t)
    s[t] = setpoint_step(s[t - 1], t, process.sigma, rng);
  return s;
}

/// Compact interval that the scalar dual variable lives in. Sized so the
/// interior dual optimum of every capacity-feasible round fits inside:
/// interior optima satisfy |nu| = 2 c |a| <= 2 c_max cap_max, and the
/// margin absorbs saturated rounds.
struct DualDomain {
  double nu_lo = 0.0;
  double nu_hi = 0.0;
};

inline DualDomain dual_domain_for(const std::vector<Building>& buildings,
                                  double margin = 0.25) {
  if (buildings.empty())
    throw contract_violation_error("need at least one building");
  double c_max = 0.0, cap_max = 0.0;
  for (const Building& b : buildings) {
    c_max = std::max(c_max, b.c);
    cap_max = std::max(cap_max, b.capacity());
  }
  double reach = 2.0 * c_max * cap_max * (1.0 + margin);
  return DualDomain{-reach, reach};
}

/// Aggregate price response sum_i clamp(-nu / 2c_i); nonincreasing in nu.
inline double aggregate_response(double nu, const std::vector<Building>& buildings) {
  double total = 0.0;
  for (const Building& b : buildings) total += primal_recovery(nu, b);
  return total;
}

struct Dispatch {
  Vector adjustments;      // a*, one entry per building
  double nu = 0.0;         // dual value backing the dispatch
  bool saturated = false;  // setpoint exceeded aggregate capacity
};

namespace detail {

inline Dispatch bisect_dispatch(double setpoint,
                                const std::vector<Building>& buildings,
                                const DualDomain& domain) {
  // Invariant: h(lo) >= s >= h(hi) for the nonincreasing aggregate map h.
  double lo = domain.nu_lo, hi = domain.nu_hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (aggregate_response(mid, buildings) >= setpoint)
      lo = mid;
    else
      hi = mid;
  }
  Dispatch dispatch;
  dispatch.nu = 0.5 * (lo + hi);
  dispatch.adjustments.resize(static_cast<Eigen::Index>(buildings.size()));
  for (std::size_t i = 0; i < buildings.size(); ++i)
    dispatch.adjustments(static_cast<Eigen::Index>(i)) =
        primal_recovery(dispatch.nu, buildings[i]);
  return dispatch;
}

}  // namespace detail

/// Exact centralized solve of the setpoint-tracking dispatch:
/// minimize sum c_i a_i^2 subject to sum a_i = s and the boxes, by
/// monotone bisection on the dual variable. Throws on infeasible s.
inline Dispatch centralized_oracle(double setpoint,
                                   const std::vector<Building>& buildings,
                                   const DualDomain& domain) {
  double cap_lo = 0.0, cap_hi = 0.0;
  for (const Building& b : buildings) {
    cap_lo += b.a_lo;
    cap_hi += b.a_hi;
  }
  if (setpoint < cap_lo || setpoint > cap_hi)
    throw infeasibility_error(setpoint, cap_lo, cap_hi);

  Dispatch dispatch = detail::bisect_dispatch(setpoint, buildings, domain);
  double residual = std::abs(dispatch.adjustments.sum() - setpoint);
  if (residual > 1e-10)
    throw numeric_failure_error("dispatch bisection left constraint residual " +
                                std::to_string(residual));
  return dispatch;
}

inline Dispatch centralized_oracle(double setpoint,
                                   const std::vector<Building>& buildings) {
  return centralized_oracle(setpoint, buildings, dual_domain_for(buildings));
}

/// Dispatch that never aborts: infeasible setpoints return the fully
/// saturated vector at the binding bound with the flag set, so a
/// random-walk signal that transiently escapes capacity cannot kill a
/// long run. The saturated point is the capacity-feasible minimizer
/// closest to meeting the constraint, and its dual sits at the domain
/// boundary, which is also where the box-constrained dual loss is
/// minimized for such rounds.
inline Dispatch solve_dispatch(double setpoint,
                               const std::vector<Building>& buildings,
                               const DualDomain& domain) {
  try {
    return centralized_oracle(setpoint, buildings, domain);
  } catch (const infeasibility_error&) {
    Dispatch dispatch;
    dispatch.saturated = true;
    dispatch.nu = setpoint > 0.0 ? domain.nu_lo : domain.nu_hi;
    dispatch.adjustments.resize(static_cast<Eigen::Index>(buildings.size()));
    for (std::size_t i = 0; i < buildings.size(); ++i) {
      const Building& b = buildings[i];
      dispatch.adjustments(static_cast<Eigen::Index>(i)) =
          setpoint > 0.0 ? b.a_hi : b.a_lo;
    }
    return dispatch;
  }
}

/// Worst-case KKT residual of a dispatch: stationarity on interior
/// components, multiplier-sign conditions on saturated ones, plus the
/// coupling-constraint mismatch when the round was feasible.
inline double kkt_residual(const Dispatch& dispatch,
                           const std::vector<Building>& buildings,
                           double setpoint) {
  double worst = 0.0;
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    const Building& b = buildings[i];
    double a = dispatch.adjustments(static_cast<Eigen::Index>(i));
    double stationarity = 2.0 * b.c * a + dispatch.nu;
    double span = b.a_hi - b.a_lo;
    if (a >= b.a_hi - 1e-9 * span)
      worst = std::max(worst, std::max(0.0, stationarity));
    else if (a <= b.a_lo + 1e-9 * span)
      worst = std::max(worst, std::max(0.0, -stationarity));
    else
      worst = std::max(worst, std::abs(stationarity));
  }
  if (!dispatch.saturated)
    worst = std::max(worst, std::abs(dispatch.adjustments.sum() - setpoint));
  return worst;
}

/// Wraps the dual decomposition as a loss oracle over the scalar dual
/// decision. Virtual setpoints are w_i s_t with the weights summing to 1;
/// L comes from the realized path since |gradient| <= |s_i| + capacity.
inline oco::LossOracle build_dr_oracle(std::vector<Building> buildings,
                                       std::vector<double> setpoints,
                                       std::vector<double> split_weights) {
  if (buildings.empty())
    throw contract_violation_error("need at least one building");
  if (split_weights.size() != buildings.size())
    throw contract_violation_error("one split weight per building required");

  double max_abs_s = 0.0;
  for (double s : setpoints) max_abs_s = std::max(max_abs_s, std::abs(s));
  double lipschitz = 0.0;
  for (std::size_t i = 0; i < buildings.size(); ++i)
    lipschitz = std::max(lipschitz, max_abs_s * std::abs(split_weights[i]) +
                                        buildings[i].capacity());

  auto setpoint_share = [buildings, setpoints, split_weights](int agent, int round) {
    if (round < 0 || round >= static_cast<int>(setpoints.size()))
      throw contract_violation_error("setpoint path does not cover round " +
                                     std::to_string(round));
    return split_weights[static_cast<std::size_t>(agent)] *
           setpoints[static_cast<std::size_t>(round)];
  };

  oco::LossOracle oracle;
  oracle.lipschitz = lipschitz;
  oracle.value = [buildings, setpoint_share](int agent, int round, const Vector& x) {
    return local_dual_loss(x(0), buildings[static_cast<std::size_t>(agent)],
                           setpoint_share(agent, round));
  };
  oracle.gradient = [buildings, setpoint_share](int agent, int round, const Vector& x) {
    Vector g(1);
    g(0) = local_dual_gradient(x(0), buildings[static_cast<std::size_t>(agent)],
                               setpoint_share(agent, round));
    return g;
  };
  return oracle;
}

inline std::vector<double> uniform_split(int agents) {
  return std::vector<double>(static_cast<std::size_t>(agents), 1.0 / agents);
}

inline std::vector<double> proportional_split(const std::vector<Building>& buildings) {
  double total = 0.0;
  for (const Building& b : buildings) total += b.capacity();
  std::vector<double> w(buildings.size());
  for (std::size_t i = 0; i < buildings.size(); ++i)
    w[i] = buildings[i].capacity() / total;
  return w;
}

}  // namespace dodwda::dr
