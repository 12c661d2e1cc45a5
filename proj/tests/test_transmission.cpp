#include <catch2/catch.hpp>

#include "fixtures.hpp"
#include "netdep/covariance.hpp"
#include "netdep/transmission.hpp"

using namespace netdep;
using namespace netdep::testing;

namespace {

Eigen::MatrixXd direct_ensemble(const AdjacencyMatrix& a, const DirectProcessConfig& cfg,
                                int replicates, std::uint64_t base_seed) {
  Eigen::MatrixXd samples(replicates, a.n());
  for (int r = 0; r < replicates; ++r) {
    samples.row(r) =
        simulate_direct(a, cfg, derive_seed(base_seed, {static_cast<std::uint64_t>(r)}))
            .transpose();
  }
  return samples;
}

}  // namespace

TEST_CASE("config validation", "[transmission]") {
  DirectProcessConfig direct;
  direct.steps = 0;
  CHECK_THROWS_AS(direct.validate(), ParameterError);
  direct.steps = 1;
  direct.noise_sd = 0.0;
  CHECK_THROWS_AS(direct.validate(), ParameterError);

  EquilibriumProcessConfig eq;
  eq.baseline_sd = 0.0;
  CHECK_THROWS_AS(eq.validate(), ParameterError);
  eq.baseline_sd = 1.0;
  eq.noise_sd = 0.0;  // noise-free equilibrium draws are allowed
  CHECK_NOTHROW(eq.validate());
}

TEST_CASE("simulations are deterministic given the seed", "[transmission]") {
  const AdjacencyMatrix a = toy_network();
  DirectProcessConfig cfg;
  cfg.kappa = 0.4;
  cfg.alpha = 0.5;
  CHECK((simulate_direct(a, cfg, 42) - simulate_direct(a, cfg, 42)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((simulate_direct(a, cfg, 42) - simulate_direct(a, cfg, 43)).cwiseAbs().maxCoeff() >
        0.0);

  EquilibriumProcessConfig eq;
  eq.rho = 0.2;
  CHECK((simulate_equilibrium(a, eq, 7) - simulate_equilibrium(a, eq, 7))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("uncoupled direct process is i.i.d. standard normal", "[transmission]") {
  const AdjacencyMatrix a = toy_network();
  DirectProcessConfig cfg;  // kappa = alpha = 0, unit sds, one step
  const Eigen::MatrixXd cov = empirical_covariance(direct_ensemble(a, cfg, 100000, 901));
  CHECK((cov - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("direct process at t=1 matches the closed-form covariance", "[transmission]") {
  const AdjacencyMatrix a = path_network(3);
  DirectProcessConfig cfg;
  cfg.kappa = 0.5;
  cfg.alpha = 0.5;
  const Eigen::MatrixXd theory = direct_t1_covariance(a, cfg.kappa, cfg.alpha, 1.0, 1.0);
  const int reps = 100000;
  const Eigen::MatrixXd cov = empirical_covariance(direct_ensemble(a, cfg, reps, 322));
  const Eigen::MatrixXd se = covariance_mc_se(theory, reps);
  CHECK(((cov - theory).cwiseAbs().array() < 3.0 * se.array()).all());
}

TEST_CASE("closed-form covariance agreement on a random network", "[transmission]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(12, 18, 5);
  DirectProcessConfig cfg;
  cfg.kappa = 0.6;
  cfg.alpha = 0.3;
  const Eigen::MatrixXd theory = direct_t1_covariance(a, cfg.kappa, cfg.alpha, 1.0, 1.0);
  const int reps = 30000;
  const Eigen::MatrixXd cov = empirical_covariance(direct_ensemble(a, cfg, reps, 77));
  const Eigen::MatrixXd se = covariance_mc_se(theory, reps);
  // At 3.5 sigma a handful of the 144 entries may stray; none should at 5.
  int within = 0;
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      if (std::abs(cov(i, j) - theory(i, j)) < 3.5 * se(i, j)) ++within;
      CHECK(std::abs(cov(i, j) - theory(i, j)) < 5.0 * se(i, j));
    }
  }
  CHECK(within >= 140);
}

TEST_CASE("weak-setting generator runs at the published scale", "[transmission]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(500, 500, 8);
  DirectProcessConfig cfg;
  cfg.kappa = 0.7;
  cfg.alpha = 0.3;
  cfg.noise_sd = 0.1;
  const Eigen::VectorXd y = simulate_direct(a, cfg, 15);
  REQUIRE(y.size() == 500);
  // Average marginal variance should match the mean diagonal of the closed form.
  const auto d = eigendecompose(a);
  const double theory_mean_var =
      ((cfg.kappa * d.eigenvalues.array() + cfg.alpha).square() + cfg.noise_sd * cfg.noise_sd)
          .mean();
  double acc = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    acc += simulate_direct(a, cfg, derive_seed(99, {static_cast<std::uint64_t>(r)}))
               .squaredNorm();
  }
  const double mc_mean_var = acc / (reps * 500.0);
  CHECK(mc_mean_var == Approx(theory_mean_var).epsilon(0.05));
}

TEST_CASE("equilibrium with rho=0 is plain noise", "[transmission]") {
  const AdjacencyMatrix a = path_network(4);
  EquilibriumProcessConfig cfg;
  cfg.rho = 0.0;
  cfg.baseline_sd = 1.0;
  cfg.noise_sd = 0.5;
  const int reps = 100000;
  Eigen::MatrixXd samples(reps, 4);
  for (int r = 0; r < reps; ++r) {
    samples.row(r) =
        simulate_equilibrium(a, cfg, derive_seed(4, {static_cast<std::uint64_t>(r)}))
            .transpose();
  }
  const Eigen::MatrixXd cov = empirical_covariance(samples);
  const Eigen::MatrixXd theory = 1.25 * Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd se = covariance_mc_se(theory, reps);
  CHECK(((cov - theory).cwiseAbs().array() < 4.0 * se.array()).all());
}

TEST_CASE("noise-free equilibrium on a single edge matches the hand inverse",
          "[transmission]") {
  const AdjacencyMatrix k2 = single_edge_network();
  EquilibriumProcessConfig cfg;
  cfg.rho = 0.5;
  cfg.baseline_sd = 1.0;
  cfg.noise_sd = 0.0;
  // (I - 0.5 A)^{-2} for the single edge: [[20/9, 16/9], [16/9, 20/9]].
  Eigen::MatrixXd theory(2, 2);
  theory << 20.0 / 9.0, 16.0 / 9.0, 16.0 / 9.0, 20.0 / 9.0;
  const int reps = 100000;
  Eigen::MatrixXd samples(reps, 2);
  for (int r = 0; r < reps; ++r) {
    samples.row(r) =
        simulate_equilibrium(k2, cfg, derive_seed(31, {static_cast<std::uint64_t>(r)}))
            .transpose();
  }
  const Eigen::MatrixXd cov = empirical_covariance(samples);
  const Eigen::MatrixXd se = covariance_mc_se(theory, reps);
  CHECK(((cov - theory).cwiseAbs().array() < 3.0 * se.array()).all());
}

TEST_CASE("equilibrium covariance matches the NAM form", "[transmission]") {
  const AdjacencyMatrix toy = toy_network();
  EquilibriumProcessConfig cfg;
  cfg.rho = 0.2;
  cfg.baseline_sd = 1.0;
  cfg.noise_sd = 0.5;
  const Eigen::MatrixXd theory = nam_covariance(toy, cfg.rho, 1.0 + 0.25);
  const int reps = 20000;
  Eigen::MatrixXd samples(reps, 10);
  const auto decomp = eigendecompose(toy);
  for (int r = 0; r < reps; ++r) {
    samples.row(r) = simulate_equilibrium(toy, cfg,
                                          derive_seed(47, {static_cast<std::uint64_t>(r)}),
                                          decomp)
                         .transpose();
  }
  const Eigen::MatrixXd cov = empirical_covariance(samples);
  const Eigen::MatrixXd se = covariance_mc_se(theory, reps);
  CHECK(((cov - theory).cwiseAbs().array() < 4.0 * se.array()).all());
}

TEST_CASE("equilibrium rejects infeasible rho", "[transmission]") {
  const AdjacencyMatrix k2 = single_edge_network();
  EquilibriumProcessConfig cfg;
  cfg.rho = 1.0;  // eigenvalues are +/-1, so the feasible range is (-1, 1)
  CHECK_THROWS_AS(simulate_equilibrium(k2, cfg, 1), SingularityError);
  cfg.rho = -1.2;
  CHECK_THROWS_AS(simulate_equilibrium(k2, cfg, 1), SingularityError);

  const auto decomp = eigendecompose(k2);
  CHECK(equilibrium_feasible(decomp, 0.5));
  CHECK(equilibrium_feasible(decomp, -0.99));
  CHECK_FALSE(equilibrium_feasible(decomp, 1.0));
  CHECK_FALSE(equilibrium_feasible(decomp, -1.0));
  CHECK_FALSE(equilibrium_feasible(decomp, 2.5));
}

TEST_CASE("unchecked equilibrium draw exists beyond the feasible range", "[transmission]") {
  // A 4-star has lambda_max = 2; rho = 0.6 is super-critical yet the linear
  // system is still nonsingular, so the algebraic draw must succeed.
  const AdjacencyMatrix star =
      AdjacencyMatrix::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  EquilibriumProcessConfig cfg;
  cfg.rho = 0.6;
  CHECK_THROWS_AS(simulate_equilibrium(star, cfg, 3), SingularityError);
  const Eigen::VectorXd y = detail::equilibrium_draw(star, cfg, 3);
  CHECK(y.allFinite());
  // Matches the explicit solve.
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(5, 5) - 0.6 * star.matrix();
  Rng rng(3);
  Eigen::VectorXd innovation(5);
  for (int i = 0; i < 5; ++i) innovation(i) = rng.normal();
  for (int i = 0; i < 5; ++i) innovation(i) += rng.normal(0.0, cfg.noise_sd);
  CHECK((y - system.partialPivLu().solve(innovation)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empirical covariance basics", "[transmission]") {
  SECTION("identical rows give the zero matrix") {
    Eigen::MatrixXd samples(2, 3);
    samples << 1.0, 2.0, 3.0, 1.0, 2.0, 3.0;
    CHECK(empirical_covariance(samples).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("fewer than two samples rejected") {
    CHECK_THROWS_AS(empirical_covariance(Eigen::MatrixXd::Zero(1, 3)), ParameterError);
  }
  SECTION("law of large numbers on i.i.d. normals") {
    Rng rng(2024);
    Eigen::MatrixXd samples(100000, 10);
    for (int r = 0; r < samples.rows(); ++r) {
      for (int c = 0; c < 10; ++c) samples(r, c) = rng.normal();
    }
    CHECK((empirical_covariance(samples) - Eigen::MatrixXd::Identity(10, 10))
              .cwiseAbs()
              .maxCoeff() < 0.05);
  }
}

TEST_CASE("distance-2 pairs are correlated at t=1", "[transmission]") {
  const AdjacencyMatrix toy = toy_network();
  DirectProcessConfig cfg;
  cfg.kappa = 0.7;
  cfg.alpha = 0.3;
  const auto geo = geodesic_distances(toy);
  const Eigen::MatrixXd theory = direct_t1_covariance(toy, cfg.kappa, cfg.alpha, 1.0, 1.0);
  const int reps = 1000;
  const Eigen::MatrixXd cov = empirical_covariance(direct_ensemble(toy, cfg, reps, 64));
  const Eigen::MatrixXd se = covariance_mc_se(theory, reps);
  bool found_distance_two = false;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      if (geo.reachable(i, j) && geo.dist(i, j) == 2) {
        found_distance_two = true;
        CHECK(theory(i, j) > 0.1);
        CHECK(std::abs(cov(i, j) - theory(i, j)) < 3.5 * se(i, j));
      }
    }
  }
  REQUIRE(found_distance_two);
}
