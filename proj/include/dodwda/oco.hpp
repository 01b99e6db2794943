#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dodwda/errors.hpp"
#include "dodwda/topology.hpp"

namespace dodwda::oco {

using Vector = Eigen::VectorXd;

/// Axis-aligned box decision set.
struct DecisionSet {
  Vector lower;
  Vector upper;

  int dimension() const { return static_cast<int>(lower.size()); }

  static DecisionSet box(Vector lo, Vector hi) {
    if (lo.size() != hi.size() || lo.size() == 0)
      throw contract_violation_error("box bounds must share a nonzero dimension");
    if (!lo.allFinite() || !hi.allFinite())
      throw contract_violation_error("decision set must be bounded");
    if (((hi - lo).array() < 0.0).any())
      throw contract_violation_error("box lower bound exceeds upper bound");
    return {std::move(lo), std::move(hi)};
  }

  static DecisionSet interval(double lo, double hi) {
    Vector l(1), u(1);
    l << lo;
    u << hi;
    return box(std::move(l), std::move(u));
  }

  Vector clamp(const Vector& v) const {
    return v.cwiseMax(lower).cwiseMin(upper);
  }

  bool contains(const Vector& v, double tol = 1e-12) const {
    return ((v - lower).array() >= -tol).all() &&
           ((upper - v).array() >= -tol).all();
  }

  bool contains_zero() const {
    return (lower.array() <= 0.0).all() && (upper.array() >= 0.0).all();
  }
};

/// 1-strongly-convex proximal function. The quadratic default
/// psi(x) = ||x||^2 / 2 admits a closed-form regularized projection onto
/// boxes; anything else goes through the projected-gradient inner solver
/// and must supply its gradient and a smoothness constant.
struct ProximalFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  double smoothness = 1.0;
  bool closed_form_on_box = false;

  static ProximalFunction quadratic() {
    ProximalFunction psi;
    psi.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
    psi.grad = [](const Vector& x) { return x; };
    psi.smoothness = 1.0;
    psi.closed_form_on_box = true;
    return psi;
  }
};

/// Per-agent, per-round convex loss with a shared gradient-norm bound L.
/// gradient() may return any subgradient where the loss is kinked.
struct LossOracle {
  std::function<double(int agent, int round, const Vector& x)> value;
  std::function<Vector(int agent, int round, const Vector& x)> gradient;
  double lipschitz = 0.0;
};

struct AgentState {
  Vector y;  // accumulated dual vector
  Vector x;  // implemented decision, always inside the decision set
};

/// Fixed horizon and step size: alpha = beta / T, constant across rounds.
struct EngineConfig {
  double beta = 0.0;
  int rounds = 0;  // T
  double alpha = 0.0;

  static EngineConfig make(double beta, int rounds) {
    if (!(beta > 0.0)) throw contract_violation_error("beta must be positive");
    if (rounds < 0) throw contract_violation_error("round count must be >= 0");
    EngineConfig cfg;
    cfg.beta = beta;
    cfg.rounds = rounds;
    cfg.alpha = rounds >= 1 ? beta / rounds : beta;
    return cfg;
  }
};

/// psi-regularized projection: argmin over the box of
/// <y, x> + psi(x) / alpha.
inline Vector regularized_projection(const Vector& y, double alpha,
                                     const ProximalFunction& psi,
                                     const DecisionSet& X) {
  if (!(alpha > 0.0))
    throw contract_violation_error("projection step size must be positive");
  if (y.size() != X.dimension())
    throw contract_violation_error("dual vector dimension mismatch");
  if (!y.allFinite())
    throw contract_violation_error("dual vector must be finite");

  if (psi.closed_form_on_box) return X.clamp(-alpha * y);

  // Projected gradient on F(x) = <y, x> + psi(x)/alpha. F is
  // (1/alpha)-strongly convex with (smoothness/alpha)-Lipschitz gradient,
  // so the fixed step alpha/smoothness converges linearly.
  const double step = alpha / psi.smoothness;
  const int max_iters = 100000;
  Vector x = X.clamp(Vector::Zero(X.dimension()));
  for (int it = 0; it < max_iters; ++it) {
    Vector g = y + psi.grad(x) / alpha;
    Vector next = X.clamp(x - step * g);
    double residual = (x - X.clamp(x - g)).norm();
    x = next;
    if (residual <= 1e-10) return x;
  }
  throw numeric_failure_error(
      "regularized projection inner solver did not reach residual 1e-10");
}

/// One gossip-plus-gradient step: y_i' = sum_j P_ij y_j + g_i, computed
/// from a frozen snapshot of the previous round for every agent.
inline std::vector<Vector> dual_update(const std::vector<Vector>& duals,
                                       const net::NetworkMatrix& P,
                                       const std::vector<Vector>& gradients) {
  const int n = P.n;
  if (static_cast<int>(duals.size()) != n ||
      static_cast<int>(gradients.size()) != n)
    throw contract_violation_error("dual update needs one dual and one gradient per agent");
  const auto dim = duals.front().size();
  for (int i = 0; i < n; ++i)
    if (duals[i].size() != dim || gradients[i].size() != dim)
      throw contract_violation_error("dual update dimension mismatch");

  std::vector<Vector> next(n);
  for (int i = 0; i < n; ++i) {
    Vector mixed = Vector::Zero(dim);
    for (int j = 0; j < n; ++j) {
      double w = P.entries(i, j);
      if (w != 0.0) mixed += w * duals[j];
    }
    next[i] = mixed + gradients[i];
  }
  return next;
}

/// Maps every agent's fresh dual vector through the regularized projection.
inline std::vector<Vector> primal_update(const std::vector<Vector>& new_duals,
                                         const EngineConfig& cfg,
                                         const ProximalFunction& psi,
                                         const DecisionSet& X) {
  std::vector<Vector> decisions(new_duals.size());
  for (std::size_t i = 0; i < new_duals.size(); ++i)
    decisions[i] = regularized_projection(new_duals[i], cfg.alpha, psi, X);
  return decisions;
}

/// Full per-round record of a run. Rows t = 0..T; round updates happen
/// between consecutive rows.
struct RunTrace {
  int agents = 0;
  int rounds = 0;  // T; the trace holds T + 1 rows
  double alpha = 0.0;
  double beta = 0.0;

  // indexed [t][agent]
  std::vector<std::vector<Vector>> decisions;
  std::vector<std::vector<Vector>> duals;
  std::vector<std::vector<double>> losses;
  std::vector<std::vector<Vector>> gradients;
  std::vector<std::vector<double>> dual_gap;  // ||ybar_t - y_{i,t}||

  // indexed [t]
  std::vector<Vector> dual_average;          // ybar_t (pi-weighted)
  std::vector<double> dual_average_norm;     // ||ybar_t||
  std::vector<Vector> gradient_average;      // gbar_t (pi-weighted)

  int row_count() const { return rounds + 1; }
};

namespace detail {
inline double checked_loss(const LossOracle& oracle, int agent, int round,
                           const Vector& x) {
  try {
    return oracle.value(agent, round, x);
  } catch (const std::exception& e) {
    throw oracle_failure_error(round, agent, e.what());
  }
}

inline Vector checked_gradient(const LossOracle& oracle, int agent, int round,
                               const Vector& x) {
  Vector g;
  try {
    g = oracle.gradient(agent, round, x);
  } catch (const std::exception& e) {
    throw oracle_failure_error(round, agent, e.what());
  }
  double norm = g.norm();
  if (!(norm <= oracle.lipschitz * (1.0 + 1e-9)))
    throw contract_violation_error(
        "gradient norm " + std::to_string(norm) + " exceeds declared L = " +
        std::to_string(oracle.lipschitz) + " at round " + std::to_string(round) +
        ", agent " + std::to_string(agent));
  return g;
}
}  // namespace detail

/// Runs the weighted dual-averaging protocol for rounds t = 0..T.
///
/// Information order per round: implement x_{i,t}, observe the loss at
/// x_{i,t}, then query the (sub)gradient at the same point, and only then
/// mix duals and project. Gradient norms are checked against the oracle's
/// declared L because every downstream bound depends on it.
inline RunTrace run(const EngineConfig& cfg, const net::NetworkMatrix& P,
                    const Eigen::VectorXd& pi, const ProximalFunction& psi,
                    const DecisionSet& X, const LossOracle& oracle,
                    int agents) {
  if (agents < 1) throw contract_violation_error("need at least one agent");
  if (P.n != agents)
    throw contract_violation_error("network size does not match agent count");
  if (pi.size() != agents)
    throw contract_violation_error("stationary distribution size mismatch");
  if (psi.closed_form_on_box && !X.contains_zero())
    throw contract_violation_error(
        "decision set must contain 0 for the quadratic proximal function");

  const int T = cfg.rounds;
  RunTrace trace;
  trace.agents = agents;
  trace.rounds = T;
  trace.alpha = cfg.alpha;
  trace.beta = cfg.beta;
  trace.decisions.resize(T + 1);
  trace.duals.resize(T + 1);
  trace.losses.resize(T + 1);
  trace.gradients.resize(T + 1);
  trace.dual_gap.resize(T + 1);
  trace.dual_average.resize(T + 1);
  trace.dual_average_norm.resize(T + 1);
  trace.gradient_average.resize(T + 1);

  const int dim = X.dimension();
  std::vector<Vector> duals(agents, Vector::Zero(dim));
  std::vector<Vector> decisions(
      agents, regularized_projection(Vector::Zero(dim), cfg.alpha, psi, X));

  for (int t = 0; t <= T; ++t) {
    trace.duals[t] = duals;
    trace.decisions[t] = decisions;

    Vector ybar = Vector::Zero(dim);
    for (int i = 0; i < agents; ++i) ybar += pi(i) * duals[i];
    trace.dual_average[t] = ybar;
    trace.dual_average_norm[t] = ybar.norm();
    trace.dual_gap[t].resize(agents);
    for (int i = 0; i < agents; ++i)
      trace.dual_gap[t][i] = (ybar - duals[i]).norm();

    trace.losses[t].resize(agents);
    trace.gradients[t].resize(agents);
    Vector gbar = Vector::Zero(dim);
    for (int i = 0; i < agents; ++i) {
      if (!X.contains(decisions[i]))
        throw numeric_failure_error("decision left the feasible box at round " +
                                    std::to_string(t));
      trace.losses[t][i] = detail::checked_loss(oracle, i, t, decisions[i]);
      trace.gradients[t][i] =
          detail::checked_gradient(oracle, i, t, decisions[i]);
      gbar += pi(i) * trace.gradients[t][i];
    }
    trace.gradient_average[t] = gbar;

    if (t < T) {
      duals = dual_update(duals, P, trace.gradients[t]);
      decisions = primal_update(duals, cfg, psi, X);
    }
  }
  return trace;
}

}  // namespace dodwda::oco
