#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "dodwda/errors.hpp"
#include "dodwda/oco.hpp"

namespace dodwda::regret {

using Vector = Eigen::VectorXd;

/// Everything needed to score a finished run against the per-round
/// centralized optimum. Rows are aligned with the engine trace
/// (t = 0..T); regret sums run over t = 1..T.
struct RegretLedger {
  int agents = 0;
  int rounds = 0;  // T
  std::vector<std::vector<double>> agent_losses;  // f_{i,t}(x_{i,t}), [t][i]
  std::vector<double> optimal_value;              // f_t(x*_t)
  std::vector<Vector> optimizer;                  // x*_t

  bool complete() const {
    return rounds >= 0 &&
           agent_losses.size() == static_cast<std::size_t>(rounds + 1) &&
           optimal_value.size() == static_cast<std::size_t>(rounds + 1) &&
           optimizer.size() == static_cast<std::size_t>(rounds + 1);
  }
};

/// Per-round summands plus sign diagnostics. A summand more negative
/// than -1e-9 usually means the centralized oracle returned a suboptimal
/// comparator, but it can also be legitimate: the network regret
/// evaluates each agent's own loss at its own decision, and agents spread
/// across their individual minimizers can undercut the common optimum.
struct RegretTerms {
  std::vector<double> summands;  // index 0 corresponds to round t = 1
  double total = 0.0;
  double min_summand = 0.0;
  int flagged = 0;  // count of summands below -1e-9

  std::vector<double> cumulative() const {
    std::vector<double> out(summands.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < summands.size(); ++i) {
      acc += summands[i];
      out[i] = acc;
    }
    return out;
  }
};

inline RegretTerms network_regret_terms(const RegretLedger& ledger) {
  if (!ledger.complete())
    throw contract_violation_error("regret ledger is missing rounds");
  RegretTerms terms;
  terms.summands.reserve(ledger.rounds);
  for (int t = 1; t <= ledger.rounds; ++t) {
    double mean_loss = 0.0;
    for (int i = 0; i < ledger.agents; ++i) mean_loss += ledger.agent_losses[t][i];
    mean_loss /= ledger.agents;
    double summand = mean_loss - ledger.optimal_value[t];
    terms.summands.push_back(summand);
    terms.total += summand;
    terms.min_summand = std::min(terms.min_summand, summand);
    if (summand < -1e-9) ++terms.flagged;
  }
  return terms;
}

/// Network dynamic regret: sum over rounds of the agent-averaged played
/// loss minus the centralized round optimum. Enforces the sign
/// postcondition; use network_regret_terms when spread-induced negative
/// summands are expected and should be inspected instead.
inline double network_dynamic_regret(const RegretLedger& ledger) {
  RegretTerms terms = network_regret_terms(ledger);
  if (terms.flagged > 0)
    throw contract_violation_error(
        "network regret summand of " + std::to_string(terms.min_summand) +
        " is below -1e-9; centralized comparator looks suboptimal");
  return terms.total;
}

/// Local dynamic regret of agent j: its decision sequence scored under
/// the network-average loss. Needs the oracle to re-evaluate every
/// agent's loss at agent j's decisions.
inline double local_dynamic_regret(const RegretLedger& ledger, int j,
                                   const oco::LossOracle& oracle,
                                   const oco::RunTrace& trace) {
  if (!ledger.complete())
    throw contract_violation_error("regret ledger is missing rounds");
  if (j < 0 || j >= ledger.agents)
    throw contract_violation_error("agent index out of range");
  if (trace.rounds != ledger.rounds || trace.agents != ledger.agents)
    throw contract_violation_error("trace and ledger shapes disagree");

  double total = 0.0;
  for (int t = 1; t <= ledger.rounds; ++t) {
    double network_loss = 0.0;
    for (int i = 0; i < ledger.agents; ++i)
      network_loss += oracle.value(i, t, trace.decisions[t][j]);
    network_loss /= ledger.agents;
    double summand = network_loss - ledger.optimal_value[t];
    if (summand < -1e-9)
      throw contract_violation_error(
          "local regret summand of " + std::to_string(summand) +
          " is below -1e-9 at round " + std::to_string(t) +
          "; centralized comparator looks suboptimal");
    total += summand;
  }
  return total;
}

/// Path length of the comparator sequence: the sum of distances between
/// consecutive optima. The trailing optimum is carried forward, so the
/// padded final term contributes zero.
inline double path_length(const std::vector<Vector>& optima) {
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < optima.size(); ++t)
    total += (optima[t + 1] - optima[t]).norm();
  return total;
}

enum class AbsoluteRegretScaling { mean, sum };

/// Running mean of per-round absolute errors up to round t. The `sum`
/// scaling drops the 1/n on the played losses, matching the experiment
/// section's displayed formula rather than the regret definition.
inline double average_absolute_regret(
    const RegretLedger& ledger, int t,
    AbsoluteRegretScaling scaling = AbsoluteRegretScaling::mean) {
  if (!ledger.complete())
    throw contract_violation_error("regret ledger is missing rounds");
  if (t < 1 || t > ledger.rounds)
    throw contract_violation_error(
        "average absolute regret needs a round index in 1..T");
  double acc = 0.0;
  for (int tau = 1; tau <= t; ++tau) {
    double played = 0.0;
    for (int i = 0; i < ledger.agents; ++i) played += ledger.agent_losses[tau][i];
    if (scaling == AbsoluteRegretScaling::mean) played /= ledger.agents;
    acc += std::abs(played - ledger.optimal_value[tau]);
  }
  return acc / t;
}

/// Constants that instantiate the dynamic regret bound.
struct BoundInputs {
  double lipschitz = 0.0;       // L
  int agents = 0;               // n
  double p_max = 0.0;           // largest network matrix entry
  double gamma = 0.0;           // mixing rate
  int nu = 1;                   // mixing period
  double preimage_bound = 0.0;  // Y
  double beta = 0.0;
  double path_length = 0.0;     // V_T
};

struct BoundTerms {
  double consensus = 0.0;   // beta L^2 (n / (gamma (1 - gamma^(1/nu))) + 2)
  double projection = 0.0;  // beta L (n^2 L / (1 - p) + L + Y)
  double path = 0.0;        // L V_T
  double total = 0.0;
};

inline BoundTerms theorem_bound_terms(const BoundInputs& in) {
  bool positive = in.lipschitz > 0.0 && in.agents > 0 && in.p_max > 0.0 &&
                  in.gamma > 0.0 && in.nu >= 1 && in.preimage_bound > 0.0 &&
                  in.beta > 0.0 && in.path_length >= 0.0;
  if (!positive || in.gamma >= 1.0 || in.p_max >= 1.0)
    throw invalid_inputs_error(
        "bound inputs need L, n, Y, beta > 0, V_T >= 0, and p, gamma in (0, 1)");

  const double L = in.lipschitz;
  const double n = static_cast<double>(in.agents);
  BoundTerms terms;
  terms.consensus =
      in.beta * L * L *
      (n / (in.gamma * (1.0 - std::pow(in.gamma, 1.0 / in.nu))) + 2.0);
  terms.projection =
      in.beta * L * (n * n * L / (1.0 - in.p_max) + L + in.preimage_bound);
  terms.path = L * in.path_length;
  terms.total = terms.consensus + terms.projection + terms.path;
  return terms;
}

/// Upper bound on the network dynamic regret (and on every agent's local
/// dynamic regret) for the constant step size alpha = beta / T.
inline double theorem1_bound(const BoundInputs& in) {
  return theorem_bound_terms(in).total;
}

/// Instantiates the preimage-norm constant Y for the quadratic proximal
/// function on a box: the minimal-norm dual preimage of an interior
/// optimizer x* is -x*/alpha. Padded 10% and floored at 1 so the bound
/// stays finite and valid even when every optimum sits at the origin.
inline double estimate_preimage_bound(const std::vector<Vector>& optima,
                                      double alpha) {
  if (!(alpha > 0.0))
    throw contract_violation_error("alpha must be positive to estimate Y");
  double largest = 0.0;
  for (const Vector& x : optima) largest = std::max(largest, x.norm());
  return std::max(1.0, 1.1 * largest / alpha);
}

}  // namespace dodwda::regret
