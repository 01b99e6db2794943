#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dodwda/errors.hpp"

namespace dodwda::net {

/// Row-stochastic gossip matrix over n agents. Entry (i, j) > 0, i != j,
/// means agent i hears agent j directly.
struct NetworkMatrix {
  int n = 0;
  Eigen::MatrixXd entries;

  bool neighbor(int i, int j) const { return i != j && entries(i, j) > 0.0; }

  int degree(int i) const {
    int d = 0;
    for (int j = 0; j < n; ++j)
      if (neighbor(i, j)) ++d;
    return d;
  }

  /// Largest entry, the constant p of the dual-average norm bound.
  double max_entry() const { return entries.maxCoeff(); }
};

struct StationaryDistribution {
  Eigen::VectorXd pi;
};

/// Geometric mixing envelope |(P^k)_ij - pi_j| <= gamma^floor(k/nu),
/// valid on the sampled range k = 1..effective_horizon.
struct MixingParameters {
  double gamma = 0.0;
  int nu = 1;
  double p_max = 0.0;
  int effective_horizon = 0;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ValidationCheck& c) { return c.passed; });
  }

  std::string failed_names() const {
    std::string out;
    for (const auto& c : checks) {
      if (c.passed) continue;
      if (!out.empty()) out += ", ";
      out += c.name;
    }
    return out;
  }
};

namespace detail {

inline std::vector<int> reachable_from(const NetworkMatrix& P, int start,
                                       bool reversed) {
  std::vector<int> dist(P.n, -1);
  std::vector<int> queue{start};
  dist[start] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int u = queue[head];
    for (int v = 0; v < P.n; ++v) {
      double w = reversed ? P.entries(v, u) : P.entries(u, v);
      if (w > 0.0 && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

inline bool strongly_connected(const NetworkMatrix& P) {
  auto fwd = reachable_from(P, 0, false);
  auto bwd = reachable_from(P, 0, true);
  for (int i = 0; i < P.n; ++i)
    if (fwd[i] < 0 || bwd[i] < 0) return false;
  return true;
}

// Period of a strongly connected directed graph: gcd over all edges
// (u, v) of dist(u) + 1 - dist(v), with dist taken from any BFS root.
// Aperiodic iff the period is 1. Self-loops contribute a gcd term of 1.
inline int graph_period(const NetworkMatrix& P) {
  auto dist = reachable_from(P, 0, false);
  int g = 0;
  for (int u = 0; u < P.n; ++u) {
    for (int v = 0; v < P.n; ++v) {
      if (P.entries(u, v) > 0.0)
        g = std::gcd(g, std::abs(dist[u] + 1 - dist[v]));
    }
  }
  return g == 0 ? 1 : g;
}

}  // namespace detail

/// Checks every gossip-network assumption and reports each one
/// individually. Callers that need a hard gate use require_valid.
inline ValidationReport validate(const NetworkMatrix& P) {
  ValidationReport report;
  const double row_tol = 1e-12;

  bool square = P.entries.rows() == P.n && P.entries.cols() == P.n && P.n >= 1;
  if (!square) {
    report.checks.push_back({"square-shape", false, "entries are not n-by-n"});
    return report;
  }

  double worst_row = 0.0;
  for (int i = 0; i < P.n; ++i)
    worst_row = std::max(worst_row, std::abs(P.entries.row(i).sum() - 1.0));
  report.checks.push_back({"row-stochastic", worst_row <= row_tol,
                           "max |row sum - 1| = " + std::to_string(worst_row)});

  bool nonneg = (P.entries.array() >= 0.0).all();
  report.checks.push_back({"nonnegative", nonneg, nonneg ? "" : "negative entry"});

  int min_deg = P.n;
  for (int i = 0; i < P.n; ++i) min_deg = std::min(min_deg, P.degree(i));
  report.checks.push_back({"min-degree-2", min_deg >= 2,
                           "minimum neighbor count = " + std::to_string(min_deg)});

  bool nn_ok = nonneg;  // connectivity checks are meaningless on negative masks
  bool connected = nn_ok && detail::strongly_connected(P);
  report.checks.push_back({"strongly-connected", connected,
                           connected ? "" : "some agent unreachable"});

  bool aperiodic = connected && detail::graph_period(P) == 1;
  report.checks.push_back({"aperiodic", aperiodic,
                           connected ? (aperiodic ? "" : "periodic cycle structure")
                                     : "not evaluated (disconnected)"});

  double p = P.max_entry();
  report.checks.push_back({"max-entry-below-1", p < 1.0,
                           "max entry = " + std::to_string(p)});

  return report;
}

/// Throws invalid_topology_error naming every failed check.
inline void require_valid(const NetworkMatrix& P) {
  ValidationReport report = validate(P);
  if (!report.all_passed())
    throw invalid_topology_error("network matrix rejected: failed checks: " +
                                 report.failed_names());
}

/// Symmetric ring: self weight on the diagonal, (1 - self weight)/2 to
/// each of the two ring neighbors.
inline NetworkMatrix build_ring(int n, double self_weight) {
  if (n < 3)
    throw invalid_topology_error(
        "ring needs n >= 3 agents to give everyone two neighbors (got n = " +
        std::to_string(n) + ")");
  if (!(self_weight > 0.0 && self_weight < 1.0))
    throw invalid_topology_error("ring self weight must lie in (0, 1)");

  NetworkMatrix P;
  P.n = n;
  P.entries = Eigen::MatrixXd::Zero(n, n);
  double side = (1.0 - self_weight) / 2.0;
  for (int i = 0; i < n; ++i) {
    P.entries(i, i) = self_weight;
    P.entries(i, (i + 1) % n) += side;
    P.entries(i, (i + n - 1) % n) += side;
  }
  return P;
}

/// Left stationary vector of a validated P: pi P = pi, sum(pi) = 1.
/// Solved directly as the null space of (P^T - I) with the normalization
/// row appended, then verified against the stationarity residual.
inline StationaryDistribution stationary_distribution(const NetworkMatrix& P) {
  const int n = P.n;
  Eigen::MatrixXd A = P.entries.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;

  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);
  double sum = pi.sum();
  if (!(std::abs(sum) > 0.0) || !pi.allFinite())
    throw numeric_failure_error("stationary solve produced a degenerate vector");
  pi /= sum;

  double residual = (P.entries.transpose() * pi - pi).cwiseAbs().maxCoeff();
  bool open_unit = (pi.array() > 0.0).all() && (pi.array() < 1.0).all();
  if (residual > 1e-10 || !open_unit)
    throw numeric_failure_error(
        "stationary distribution failed verification (residual = " +
        std::to_string(residual) + "); matrix slipped past validation");
  return {pi};
}

/// Fits the one-step geometric envelope gamma (nu fixed to 1) from
/// explicit matrix powers: the smallest rate with
/// max_ij |(P^k)_ij - pi_j| <= gamma^k on every sampled k.
///
/// Sampling stops at the first k whose deviation falls to the stationarity
/// noise floor; past that point the deviations are roundoff, and fitting
/// them would push gamma toward 1 as the horizon grows. The deviation
/// max_ij |(P^k)_ij - pi_j| is non-increasing in k, so stopping early
/// discards no information.
inline MixingParameters estimate_mixing(const NetworkMatrix& P,
                                        const StationaryDistribution& pi,
                                        int horizon) {
  if (horizon < 2 * P.n)
    throw contract_violation_error("mixing horizon must be at least 2n");

  const double floor_tol = 1e-13;
  MixingParameters mix;
  mix.nu = 1;
  mix.p_max = P.max_entry();

  Eigen::MatrixXd stationary_rows =
      Eigen::VectorXd::Ones(P.n) * pi.pi.transpose();
  Eigen::MatrixXd power = P.entries;
  double gamma = 0.0;
  int k = 1;
  for (; k <= horizon; ++k) {
    double deviation = (power - stationary_rows).cwiseAbs().maxCoeff();
    if (deviation <= floor_tol) break;
    gamma = std::max(gamma, std::pow(deviation, 1.0 / k));
    if (k < horizon) power *= P.entries;
  }
  mix.effective_horizon = std::min(k, horizon);

  if (gamma <= 0.0) gamma = floor_tol;  // instantly mixing matrix
  if (gamma >= 1.0)
    throw mixing_estimation_error(
        "no geometric envelope with rate < 1 fits the sampled powers (gamma = " +
        std::to_string(gamma) + ")");
  mix.gamma = gamma;

  // Re-check the envelope on everything sampled.
  power = P.entries;
  for (int j = 1; j <= mix.effective_horizon; ++j) {
    double deviation = (power - stationary_rows).cwiseAbs().maxCoeff();
    if (deviation > floor_tol &&
        deviation > std::pow(mix.gamma, j) * (1.0 + 1e-9))
      throw mixing_estimation_error("fitted envelope fails at k = " +
                                    std::to_string(j));
    if (j < mix.effective_horizon) power *= P.entries;
  }
  return mix;
}

}  // namespace dodwda::net
