#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dodwda/regret.hpp"

using namespace dodwda::regret;
using dodwda::oco::LossOracle;
using dodwda::oco::RunTrace;

namespace {

Vector scalar(double v) {
  Vector x(1);
  x << v;
  return x;
}

// Two quadratic agents, f_1(x) = x^2 and f_2(x) = (x - 2)^2, whose
// network average is minimized at x* = 1 with value 1.
LossOracle two_quadratics() {
  LossOracle oracle;
  oracle.lipschitz = 100.0;
  oracle.value = [](int agent, int, const Vector& x) {
    double shift = agent == 0 ? 0.0 : 2.0;
    return (x(0) - shift) * (x(0) - shift);
  };
  oracle.gradient = [](int agent, int, const Vector& x) {
    double shift = agent == 0 ? 0.0 : 2.0;
    return scalar(2.0 * (x(0) - shift));
  };
  return oracle;
}

RegretLedger ledger_for_plays(const LossOracle& oracle, int agents,
                              const std::vector<std::vector<Vector>>& plays,
                              const std::vector<Vector>& optima) {
  RegretLedger ledger;
  ledger.agents = agents;
  ledger.rounds = static_cast<int>(plays.size()) - 1;
  ledger.agent_losses.resize(plays.size());
  ledger.optimal_value.resize(plays.size());
  ledger.optimizer = optima;
  for (std::size_t t = 0; t < plays.size(); ++t) {
    ledger.agent_losses[t].resize(agents);
    double opt = 0.0;
    for (int i = 0; i < agents; ++i) {
      ledger.agent_losses[t][i] = oracle.value(i, static_cast<int>(t), plays[t][i]);
      opt += oracle.value(i, static_cast<int>(t), optima[t]);
    }
    ledger.optimal_value[t] = opt / agents;
  }
  return ledger;
}

}  // namespace

TEST_CASE("network regret of optimal play is zero") {
  LossOracle oracle = two_quadratics();
  std::vector<Vector> optima(4, scalar(1.0));
  std::vector<std::vector<Vector>> plays(4, {scalar(1.0), scalar(1.0)});
  RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
  REQUIRE(network_dynamic_regret(ledger) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("own-loss evaluation can undercut the centralized optimum") {
  LossOracle oracle = two_quadratics();
  std::vector<Vector> optima(2, scalar(1.0));

  SECTION("agents at their private minima get flagged") {
    // mean played loss (0 + 0)/2 = 0 sits below f(1) = 1: summand -1
    std::vector<std::vector<Vector>> plays{{scalar(0.0), scalar(2.0)},
                                           {scalar(0.0), scalar(2.0)}};
    RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
    RegretTerms terms = network_regret_terms(ledger);
    REQUIRE(terms.flagged == 1);
    REQUIRE(terms.min_summand == Catch::Approx(-1.0));
    REQUIRE_THROWS_AS(network_dynamic_regret(ledger),
                      dodwda::contract_violation_error);
  }

  SECTION("both agents at zero give regret one") {
    std::vector<std::vector<Vector>> plays{{scalar(0.0), scalar(0.0)},
                                           {scalar(0.0), scalar(0.0)}};
    RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
    REQUIRE(network_dynamic_regret(ledger) == Catch::Approx(1.0));
  }
}

TEST_CASE("regret is linear in the losses") {
  LossOracle oracle = two_quadratics();
  std::vector<Vector> optima(4, scalar(1.0));
  std::vector<std::vector<Vector>> plays(4, {scalar(0.5), scalar(0.5)});
  RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
  double base = network_dynamic_regret(ledger);

  RegretLedger doubled = ledger;
  for (auto& row : doubled.agent_losses)
    for (double& v : row) v *= 2.0;
  for (double& v : doubled.optimal_value) v *= 2.0;
  REQUIRE(network_dynamic_regret(doubled) == Catch::Approx(2.0 * base));
}

TEST_CASE("double-entry check: regret equals an independent trace pass") {
  LossOracle oracle = two_quadratics();
  std::vector<Vector> optima;
  std::vector<std::vector<Vector>> plays;
  for (int t = 0; t <= 6; ++t) {
    optima.push_back(scalar(1.0));
    // both agents at a common (suboptimal) point keeps summands nonnegative
    plays.push_back({scalar(0.2 * t), scalar(0.2 * t)});
  }
  RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);

  double recomputed = 0.0;
  for (int t = 1; t <= 6; ++t) {
    double mean = 0.5 * (oracle.value(0, t, plays[t][0]) +
                         oracle.value(1, t, plays[t][1]));
    double opt = 0.5 * (oracle.value(0, t, optima[t]) +
                        oracle.value(1, t, optima[t]));
    recomputed += mean - opt;
  }
  REQUIRE(network_dynamic_regret(ledger) == Catch::Approx(recomputed).margin(1e-12));
}

TEST_CASE("local regret definitions") {
  LossOracle oracle = two_quadratics();
  const int T = 3;
  std::vector<Vector> optima(T + 1, scalar(1.0));

  RunTrace trace;
  trace.agents = 2;
  trace.rounds = T;
  trace.decisions.assign(T + 1, {scalar(1.0), scalar(0.4)});

  std::vector<std::vector<Vector>> plays(T + 1, {scalar(1.0), scalar(0.4)});
  RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);

  SECTION("an agent that plays the optimum has zero local regret") {
    REQUIRE(local_dynamic_regret(ledger, 0, oracle, trace) ==
            Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("a suboptimal agent accumulates the network-loss gap") {
    // f(0.4) - f(1) = (0.16 + 2.56)/2 - 1 = 0.36 per round
    REQUIRE(local_dynamic_regret(ledger, 1, oracle, trace) ==
            Catch::Approx(0.36 * T));
  }

  SECTION("identical losses and trajectories give identical local regret") {
    LossOracle same;
    same.lipschitz = 100.0;
    same.value = [](int, int, const Vector& x) { return (x(0) - 1.0) * (x(0) - 1.0); };
    same.gradient = [](int, int, const Vector& x) { return scalar(2.0 * (x(0) - 1.0)); };
    std::vector<std::vector<Vector>> same_plays(T + 1, {scalar(0.3), scalar(0.3)});
    RegretLedger same_ledger = ledger_for_plays(same, 2, same_plays, optima);
    RunTrace same_trace;
    same_trace.agents = 2;
    same_trace.rounds = T;
    same_trace.decisions.assign(T + 1, {scalar(0.3), scalar(0.3)});
    REQUIRE(local_dynamic_regret(same_ledger, 0, same, same_trace) ==
            local_dynamic_regret(same_ledger, 1, same, same_trace));
  }

  SECTION("with one agent, local and network regret coincide") {
    LossOracle solo;
    solo.lipschitz = 100.0;
    solo.value = [](int, int, const Vector& x) { return x(0) * x(0); };
    solo.gradient = [](int, int, const Vector& x) { return scalar(2.0 * x(0)); };
    std::vector<Vector> zeros(T + 1, scalar(0.0));
    std::vector<std::vector<Vector>> solo_plays(T + 1, {scalar(0.7)});
    RegretLedger solo_ledger = ledger_for_plays(solo, 1, solo_plays, zeros);
    RunTrace solo_trace;
    solo_trace.agents = 1;
    solo_trace.rounds = T;
    solo_trace.decisions.assign(T + 1, {scalar(0.7)});
    REQUIRE(local_dynamic_regret(solo_ledger, 0, solo, solo_trace) ==
            Catch::Approx(network_dynamic_regret(solo_ledger)).margin(1e-12));
  }
}

TEST_CASE("path length sums consecutive comparator moves") {
  SECTION("constant optima travel nowhere") {
    REQUIRE(path_length({scalar(2.0), scalar(2.0), scalar(2.0)}) == 0.0);
  }

  SECTION("alternating scalar optima") {
    REQUIRE(path_length({scalar(0.0), scalar(1.0), scalar(0.0), scalar(1.0)}) ==
            Catch::Approx(3.0));
  }

  SECTION("scaling the optima scales the path") {
    std::vector<Vector> base{scalar(0.3), scalar(-0.7), scalar(1.1)};
    std::vector<Vector> scaled;
    for (const auto& v : base) scaled.push_back(-2.5 * v);
    REQUIRE(path_length(scaled) == Catch::Approx(2.5 * path_length(base)));
  }
}

TEST_CASE("average absolute regret") {
  LossOracle oracle = two_quadratics();
  std::vector<Vector> optima(5, scalar(1.0));

  SECTION("optimal play averages to zero") {
    std::vector<std::vector<Vector>> plays(5, {scalar(1.0), scalar(1.0)});
    RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
    for (int t = 1; t <= 4; ++t)
      REQUIRE(average_absolute_regret(ledger, t) ==
              Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("a single round returns its absolute error") {
    std::vector<std::vector<Vector>> plays(5, {scalar(0.0), scalar(0.0)});
    RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
    REQUIRE(average_absolute_regret(ledger, 1) == Catch::Approx(1.0));
  }

  SECTION("round zero is rejected") {
    std::vector<std::vector<Vector>> plays(5, {scalar(0.0), scalar(0.0)});
    RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
    REQUIRE_THROWS_AS(average_absolute_regret(ledger, 0),
                      dodwda::contract_violation_error);
  }

  SECTION("sum scaling drops the 1/n on played losses") {
    std::vector<std::vector<Vector>> plays(5, {scalar(0.0), scalar(0.0)});
    RegretLedger ledger = ledger_for_plays(oracle, 2, plays, optima);
    // played sum = 4, optimum 1 -> |4 - 1| = 3 per round
    REQUIRE(average_absolute_regret(ledger, 2, AbsoluteRegretScaling::sum) ==
            Catch::Approx(3.0));
  }
}

TEST_CASE("dynamic regret bound evaluation") {
  BoundInputs inputs;
  inputs.lipschitz = 2.0;
  inputs.agents = 5;
  inputs.p_max = 1.0 / 3.0;
  inputs.gamma = 0.5;
  inputs.nu = 1;
  inputs.preimage_bound = 3.0;
  inputs.beta = 200.0;
  inputs.path_length = 0.0;

  SECTION("zero path length leaves the constant terms") {
    BoundTerms terms = theorem_bound_terms(inputs);
    double consensus = 200.0 * 4.0 * (5.0 / (0.5 * 0.5) + 2.0);
    double projection = 200.0 * 2.0 * (25.0 * 2.0 / (2.0 / 3.0) + 2.0 + 3.0);
    REQUIRE(terms.consensus == Catch::Approx(consensus));
    REQUIRE(terms.projection == Catch::Approx(projection));
    REQUIRE(terms.path == 0.0);
    REQUIRE(theorem1_bound(inputs) == Catch::Approx(consensus + projection));
  }

  SECTION("bound is affine in the path length with slope L") {
    double base = theorem1_bound(inputs);
    for (double vt : {1.0, 10.0, 123.0}) {
      BoundInputs moved = inputs;
      moved.path_length = vt;
      REQUIRE(theorem1_bound(moved) ==
              Catch::Approx(base + inputs.lipschitz * vt));
    }
  }

  SECTION("rates outside (0, 1) are rejected") {
    BoundInputs bad_gamma = inputs;
    bad_gamma.gamma = 1.0;
    REQUIRE_THROWS_AS(theorem1_bound(bad_gamma), dodwda::invalid_inputs_error);
    BoundInputs bad_p = inputs;
    bad_p.p_max = 1.0;
    REQUIRE_THROWS_AS(theorem1_bound(bad_p), dodwda::invalid_inputs_error);
  }
}

TEST_CASE("preimage bound estimator") {
  SECTION("all-zero optima hit the floor") {
    REQUIRE(estimate_preimage_bound({scalar(0.0), scalar(0.0)}, 0.2) == 1.0);
  }

  SECTION("unit optima at alpha 0.2 give 5.5") {
    REQUIRE(estimate_preimage_bound({scalar(1.0), scalar(1.0)}, 0.2) ==
            Catch::Approx(5.5));
  }

  SECTION("never decreases as the horizon grows") {
    std::vector<Vector> optima;
    double prev = 0.0;
    for (int t = 1; t <= 30; ++t) {
      optima.push_back(scalar(std::sin(0.37 * t) * t * 0.1));
      double y = estimate_preimage_bound(optima, 0.5);
      REQUIRE(y >= prev);
      prev = y;
    }
  }
}
