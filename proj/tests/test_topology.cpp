#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "dodwda/rng.hpp"
#include "dodwda/topology.hpp"

using dodwda::SplitMix64;
using namespace dodwda::net;

namespace {

NetworkMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  NetworkMatrix P;
  P.n = static_cast<int>(rows.size());
  P.entries.resize(P.n, P.n);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) P.entries(i, j++) = v;
    ++i;
  }
  return P;
}

// Strictly positive row-stochastic matrix; generally not doubly stochastic.
NetworkMatrix random_positive_matrix(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  NetworkMatrix P;
  P.n = n;
  P.entries.resize(n, n);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      P.entries(i, j) = 0.05 + rng.next_double();
      sum += P.entries(i, j);
    }
    P.entries.row(i) /= sum;
  }
  return P;
}

}  // namespace

TEST_CASE("ring construction matches the closed form") {
  SECTION("n = 3 with self weight 1/3 is the uniform matrix") {
    NetworkMatrix P = build_ring(3, 1.0 / 3.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        REQUIRE(P.entries(i, j) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  }

  SECTION("n = 5 rows carry self weight and two half-shares") {
    NetworkMatrix P = build_ring(5, 1.0 / 3.0);
    for (int i = 0; i < 5; ++i) {
      REQUIRE(P.entries(i, i) == Catch::Approx(1.0 / 3.0));
      REQUIRE(P.entries(i, (i + 1) % 5) == Catch::Approx(1.0 / 3.0));
      REQUIRE(P.entries(i, (i + 4) % 5) == Catch::Approx(1.0 / 3.0));
      REQUIRE(P.entries(i, (i + 2) % 5) == 0.0);
      REQUIRE(P.entries(i, (i + 3) % 5) == 0.0);
    }
    REQUIRE(P.max_entry() == Catch::Approx(1.0 / 3.0));
  }

  SECTION("n = 2 cannot give everyone two neighbors") {
    REQUIRE_THROWS_AS(build_ring(2, 0.5), dodwda::invalid_topology_error);
  }
}

TEST_CASE("validation reports each assumption separately") {
  SECTION("a ring passes everything") {
    ValidationReport report = validate(build_ring(5, 1.0 / 3.0));
    for (const auto& check : report.checks) {
      INFO(check.name << " " << check.detail);
      CHECK(check.passed);
    }
    REQUIRE(report.all_passed());
  }

  SECTION("identity matrix fails connectivity and degree") {
    NetworkMatrix I = from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    ValidationReport report = validate(I);
    REQUIRE_FALSE(report.all_passed());
    std::string failed = report.failed_names();
    REQUIRE(failed.find("strongly-connected") != std::string::npos);
    REQUIRE(failed.find("min-degree-2") != std::string::npos);
    REQUIRE(failed.find("max-entry-below-1") != std::string::npos);
  }

  SECTION("a path graph leaves the endpoints with one neighbor") {
    NetworkMatrix P = from_rows({{0.5, 0.5, 0.0},
                                 {0.25, 0.5, 0.25},
                                 {0.0, 0.5, 0.5}});
    ValidationReport report = validate(P);
    REQUIRE_FALSE(report.all_passed());
    REQUIRE(report.failed_names().find("min-degree-2") != std::string::npos);
  }

  SECTION("an even cycle without self weight is periodic") {
    NetworkMatrix P = from_rows({{0.0, 0.5, 0.0, 0.5},
                                 {0.5, 0.0, 0.5, 0.0},
                                 {0.0, 0.5, 0.0, 0.5},
                                 {0.5, 0.0, 0.5, 0.0}});
    ValidationReport report = validate(P);
    REQUIRE(report.failed_names() == "aperiodic");
  }

  SECTION("require_valid names the failures") {
    NetworkMatrix I = from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    REQUIRE_THROWS_WITH(require_valid(I),
                        Catch::Matchers::ContainsSubstring("min-degree-2"));
  }
}

TEST_CASE("rings of any size and weight validate", "[property]") {
  SplitMix64 rng(20240811);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 3 + static_cast<int>(rng.next_u64() % 12);
    double w = rng.uniform(0.01, 0.99);
    INFO("n = " << n << ", self weight = " << w);
    REQUIRE(validate(build_ring(n, w)).all_passed());
  }
}

TEST_CASE("stationary distribution of doubly stochastic matrices is uniform") {
  for (int n : {3, 5, 8}) {
    StationaryDistribution pi = stationary_distribution(build_ring(n, 1.0 / 3.0));
    for (int i = 0; i < n; ++i)
      REQUIRE(pi.pi(i) == Catch::Approx(1.0 / n).margin(1e-12));
  }
}

TEST_CASE("stationary distribution satisfies pi P = pi") {
  SECTION("symmetric 3-agent example") {
    NetworkMatrix P = from_rows({{0.5, 0.25, 0.25},
                                 {0.25, 0.5, 0.25},
                                 {0.25, 0.25, 0.5}});
    StationaryDistribution pi = stationary_distribution(P);
    // independent check by direct multiplication
    Eigen::RowVectorXd left = pi.pi.transpose() * P.entries;
    REQUIRE((left.transpose() - pi.pi).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < 3; ++i)
      REQUIRE(pi.pi(i) == Catch::Approx(1.0 / 3.0).margin(1e-12));
  }

  SECTION("general positive matrices") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
      NetworkMatrix P = random_positive_matrix(6, seed);
      StationaryDistribution pi = stationary_distribution(P);
      REQUIRE(std::abs(pi.pi.sum() - 1.0) < 1e-12);
      Eigen::VectorXd residual = P.entries.transpose() * pi.pi - pi.pi;
      REQUIRE(residual.cwiseAbs().maxCoeff() < 1e-10);
      REQUIRE((pi.pi.array() > 0.0).all());
      REQUIRE((pi.pi.array() < 1.0).all());
    }
  }
}

TEST_CASE("stationary distribution is permutation-equivariant", "[property]") {
  NetworkMatrix P = random_positive_matrix(6, 99);
  StationaryDistribution pi = stationary_distribution(P);

  SplitMix64 rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> perm(6);
    for (int i = 0; i < 6; ++i) perm[i] = i;
    for (int i = 5; i > 0; --i)
      std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);

    NetworkMatrix Q;
    Q.n = 6;
    Q.entries.resize(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) Q.entries(perm[i], perm[j]) = P.entries(i, j);

    StationaryDistribution pi_q = stationary_distribution(Q);
    for (int i = 0; i < 6; ++i)
      REQUIRE(pi_q.pi(perm[i]) == Catch::Approx(pi.pi(i)).margin(1e-11));
  }
}

TEST_CASE("mixing envelope fitted from explicit matrix powers") {
  NetworkMatrix P = build_ring(5, 1.0 / 3.0);
  StationaryDistribution pi = stationary_distribution(P);
  MixingParameters mix = estimate_mixing(P, pi, 64);

  SECTION("matches an independent matrix-power fit") {
    Eigen::MatrixXd stationary_rows = Eigen::VectorXd::Ones(5) * pi.pi.transpose();
    Eigen::MatrixXd power = P.entries;
    double expected = 0.0;
    for (int k = 1; k <= mix.effective_horizon; ++k) {
      double dev = (power - stationary_rows).cwiseAbs().maxCoeff();
      if (dev > 1e-13) expected = std::max(expected, std::pow(dev, 1.0 / k));
      power *= P.entries;
    }
    REQUIRE(mix.nu == 1);
    REQUIRE(mix.gamma == Catch::Approx(expected).margin(1e-12));
    REQUIRE(mix.gamma > 0.0);
    REQUIRE(mix.gamma < 1.0);
    REQUIRE(mix.p_max == Catch::Approx(1.0 / 3.0));
  }

  SECTION("envelope holds on every sampled power") {
    Eigen::MatrixXd stationary_rows = Eigen::VectorXd::Ones(5) * pi.pi.transpose();
    Eigen::MatrixXd power = P.entries;
    for (int k = 1; k <= mix.effective_horizon; ++k) {
      double dev = (power - stationary_rows).cwiseAbs().maxCoeff();
      if (dev > 1e-13) {
        INFO("k = " << k);
        REQUIRE(dev <= std::pow(mix.gamma, k) * (1.0 + 1e-9));
      }
      power *= P.entries;
    }
  }

  SECTION("doubling the horizon leaves the fit unchanged") {
    MixingParameters wider = estimate_mixing(P, pi, 128);
    REQUIRE(wider.gamma == Catch::Approx(mix.gamma).margin(1e-9));
    REQUIRE(wider.nu == mix.nu);
  }
}

TEST_CASE("mixing fit on the instantly mixing uniform matrix") {
  NetworkMatrix P = build_ring(3, 1.0 / 3.0);  // all entries 1/3
  StationaryDistribution pi = stationary_distribution(P);
  MixingParameters mix = estimate_mixing(P, pi, 50);
  REQUIRE(mix.gamma > 0.0);
  REQUIRE(mix.gamma < 1.0);
}

TEST_CASE("mixing estimation preconditions") {
  NetworkMatrix P = build_ring(5, 1.0 / 3.0);
  StationaryDistribution pi = stationary_distribution(P);
  REQUIRE_THROWS_AS(estimate_mixing(P, pi, 5), dodwda::contract_violation_error);
}

TEST_CASE("mixing fit for random positive matrices stays stable", "[property]") {
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    NetworkMatrix P = random_positive_matrix(5, seed);
    StationaryDistribution pi = stationary_distribution(P);
    MixingParameters narrow = estimate_mixing(P, pi, 40);
    MixingParameters wide = estimate_mixing(P, pi, 80);
    REQUIRE(narrow.gamma == Catch::Approx(wide.gamma).margin(1e-9));
    REQUIRE(narrow.gamma > 0.0);
    REQUIRE(narrow.gamma < 1.0);
  }
}
