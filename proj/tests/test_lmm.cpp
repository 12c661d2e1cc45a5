#include <catch2/catch.hpp>
#include <chrono>

#include "fixtures.hpp"
#include "netdep/lmm.hpp"
#include "netdep/transmission.hpp"

using namespace netdep;
using namespace netdep::testing;

namespace {

// Textbook multivariate-normal log-density: explicit inverse and determinant
// through full-pivot LU, nothing shared with either likelihood route.
double mvn_loglik_oracle(const Eigen::VectorXd& resid, const Eigen::MatrixXd& v) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  const double logdet = std::log(std::abs(lu.determinant()));
  const double quad = resid.dot(lu.inverse() * resid);
  return -0.5 * resid.size() * std::log(2.0 * M_PI) - 0.5 * logdet - 0.5 * quad;
}

Eigen::MatrixXd naive_covariance(const AdjacencyMatrix& a,
                                 const PolynomialCovarianceSpec& spec) {
  const int n = a.n();
  Eigen::MatrixXd v = spec.coefficients[0] * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int m = 1; m <= spec.order; ++m) {
    power = (power * a.matrix()).eval();
    v += spec.coefficients[m] * power;
  }
  return v;
}

PolynomialCovarianceSpec random_pd_spec(Rng& rng, int d, const Eigen::VectorXd& eigenvalues) {
  std::vector<double> coef(d + 1);
  for (int m = 1; m <= d; ++m) coef[m] = rng.uniform();
  coef[0] = 0.5;
  for (;;) {
    PolynomialCovarianceSpec spec{d, coef};
    try {
      polynomial_spectrum(eigenvalues, spec);
      return spec;
    } catch (const DefinitenessError&) {
      coef[0] *= 2.0;
    }
  }
}

}  // namespace

TEST_CASE("likelihood at the origin", "[lmm]") {
  const AdjacencyMatrix k2 = single_edge_network();
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd x(2);
  x << 0.7, -0.2;
  const PolynomialCovarianceSpec spec{0, {1.0}};
  const double expected = -std::log(2.0 * M_PI);
  CHECK(lmm_loglik_direct(y, x, 0.0, spec, k2) == Approx(expected).margin(1e-12));
  CHECK(lmm_loglik_spectral(y, x, 0.0, spec, eigendecompose(k2)) ==
        Approx(expected).margin(1e-12));
}

TEST_CASE("direct likelihood matches an independent MVN oracle", "[lmm]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(5, 6, 3);
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const auto decomp = eigendecompose(a);
    const PolynomialCovarianceSpec spec = random_pd_spec(rng, 2, decomp.eigenvalues);
    const Eigen::VectorXd y = random_vector(rng, 5);
    const Eigen::VectorXd x = random_vector(rng, 5);
    const double beta = rng.normal();
    const double expected = mvn_loglik_oracle(y - beta * x, naive_covariance(a, spec));
    CHECK(lmm_loglik_direct(y, x, beta, spec, a) == Approx(expected).margin(1e-10));
  }
}

TEST_CASE("spectral and direct likelihood agree", "[lmm]") {
  Rng rng(2023);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const int n = 8 + static_cast<int>(rng.below(43));
    const long max_edges = static_cast<long>(n) * (n - 1) / 2;
    const AdjacencyMatrix a = erdos_renyi_gnm(
        n, std::min<long>(n + static_cast<long>(rng.below(25)), max_edges), trial + 100);
    const auto decomp = eigendecompose(a);
    const int d = static_cast<int>(rng.below(5));
    const PolynomialCovarianceSpec spec = random_pd_spec(rng, d, decomp.eigenvalues);
    const Eigen::VectorXd y = random_vector(rng, n);
    const Eigen::VectorXd x = random_vector(rng, n);
    const double beta = rng.normal();
    CHECK(lmm_loglik_spectral(y, x, beta, spec, decomp) ==
          Approx(lmm_loglik_direct(y, x, beta, spec, a)).margin(1e-8));
  }
}

TEST_CASE("order zero reduces to i.i.d. Gaussian likelihood", "[lmm]") {
  Rng rng(4);
  const AdjacencyMatrix toy = toy_network();
  const Eigen::VectorXd y = random_vector(rng, 10);
  const Eigen::VectorXd x = random_vector(rng, 10);
  const double s2 = 1.7, beta = 0.4;
  const Eigen::VectorXd r = y - beta * x;
  const double expected =
      -5.0 * std::log(2.0 * M_PI * s2) - r.squaredNorm() / (2.0 * s2);
  CHECK(lmm_loglik_spectral(y, x, beta, {0, {s2}}, eigendecompose(toy)) ==
        Approx(expected).margin(1e-10));
}

TEST_CASE("spectral evaluation is orders of magnitude cheaper", "[lmm]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(500, 500, 5);
  const auto decomp = eigendecompose(a);
  Rng rng(6);
  const Eigen::VectorXd y = random_vector(rng, 500);
  const Eigen::VectorXd x = random_vector(rng, 500);
  const PolynomialCovarianceSpec spec{2, {1.0, 0.2, 0.3}};

  const auto t0 = std::chrono::steady_clock::now();
  const double direct = lmm_loglik_direct(y, x, 0.3, spec, a);
  const auto t1 = std::chrono::steady_clock::now();

  // Inner-loop evaluation as used by the optimizer, after the one-off
  // projections: O(n*d) per call.
  const Eigen::VectorXd ytil = decomp.eigenvectors.transpose() * y;
  const Eigen::VectorXd xtil = decomp.eigenvectors.transpose() * x;
  double acc = 0.0;
  const int evals = 1000;
  const auto t2 = std::chrono::steady_clock::now();
  for (int k = 0; k < evals; ++k) {
    acc += detail::profiled_spectral_loglik(ytil, xtil, decomp.eigenvalues,
                                            spec.coefficients, false)
               .loglik;
  }
  const auto t3 = std::chrono::steady_clock::now();

  const double direct_cost = std::chrono::duration<double>(t1 - t0).count();
  const double spectral_cost = std::chrono::duration<double>(t3 - t2).count() / evals;
  CHECK(acc / evals == Approx(lmm_loglik_spectral(y, x, 0.0, spec, decomp)).margin(1e-8));
  CHECK(spectral_cost * 50.0 < direct_cost);
}

TEST_CASE("fit on i.i.d. data finds a diagonal covariance", "[lmm]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(500, 500, 12);
  const auto decomp = eigendecompose(a);
  Rng rng(13);
  const Eigen::VectorXd y = random_vector(rng, 500);
  const Eigen::VectorXd x = random_vector(rng, 500);
  const LmmFit fit = fit_lmm(y, x, decomp, 2);
  CHECK(fit.converged);
  CHECK(std::abs(fit.variance_components[0] - 1.0) < 0.1);
  CHECK(fit.variance_components[1] < 0.1);
  CHECK(fit.variance_components[2] < 0.1);
  CHECK(std::abs(fit.beta) < 0.1);
}

TEST_CASE("marginal fit recovers the generating covariance", "[lmm]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(500, 500, 20);
  const auto decomp = eigendecompose(a);
  DirectProcessConfig cfg;
  cfg.kappa = 0.8;
  cfg.alpha = 0.2;
  cfg.noise_sd = 0.1;
  const PolynomialCovarianceSpec truth{
      2,
      {cfg.alpha * cfg.alpha + cfg.noise_sd * cfg.noise_sd, 2.0 * cfg.alpha * cfg.kappa,
       cfg.kappa * cfg.kappa}};
  const Eigen::VectorXd s_true = polynomial_spectrum(decomp.eigenvalues, truth);

  double total_rel_err = 0.0;
  const int reps = 50;
  for (int r = 0; r < reps; ++r) {
    const Eigen::VectorXd y =
        simulate_direct(a, cfg, derive_seed(777, {static_cast<std::uint64_t>(r)}));
    const auto [w, fit] = marginal_fit_and_whiten(y, decomp, 2);
    REQUIRE(fit.converged);
    // Both V-hat and V share the eigenbasis of A, so the relative Frobenius
    // error reduces to the spectra.
    const Eigen::VectorXd s_hat =
        polynomial_spectrum(decomp.eigenvalues, fit.covariance_spec());
    total_rel_err += (s_hat - s_true).norm() / s_true.norm();
  }
  CHECK(total_rel_err / reps < 0.10);
}

TEST_CASE("profiled beta equals whitened-pair OLS", "[lmm]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(200, 260, 31);
  const auto decomp = eigendecompose(a);
  DirectProcessConfig cfg;
  cfg.kappa = 0.7;
  cfg.alpha = 0.3;
  cfg.noise_sd = 0.1;
  const Eigen::VectorXd x = simulate_direct(a, cfg, 71);
  const Eigen::VectorXd y = simulate_direct(a, cfg, 72);
  const LmmFit fit = fit_lmm(y, x, decomp, 2);
  REQUIRE(fit.converged);

  const Eigen::MatrixXd w = inverse_sqrt(polynomial_covariance(decomp, fit.covariance_spec()));
  const Eigen::VectorXd wx = w * x;
  const Eigen::VectorXd wy = w * y;
  const double ols_no_intercept = wx.dot(wy) / wx.squaredNorm();
  CHECK(fit.beta == Approx(ols_no_intercept).margin(1e-8));
}

TEST_CASE("optimum dominates the multistart points and is stationary in beta",
          "[lmm]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(60, 90, 40);
  const auto decomp = eigendecompose(a);
  DirectProcessConfig cfg;
  cfg.kappa = 0.5;
  cfg.alpha = 0.4;
  const Eigen::VectorXd y = simulate_direct(a, cfg, 91);
  const Eigen::VectorXd x = simulate_direct(a, cfg, 92);
  const LmmFit fit = fit_lmm(y, x, decomp, 2);
  REQUIRE(fit.converged);

  const double sv = (y.array() - y.mean()).square().sum() / (y.size() - 1);
  for (const auto& start : detail::lmm_multistart_points(2, sv, decomp.eigenvalues)) {
    const double at_start = lmm_loglik_spectral(
        y, x, fit.beta, PolynomialCovarianceSpec{2, start}, decomp);
    CHECK(fit.loglik >= at_start - 1e-8);
  }
  const auto spec = fit.covariance_spec();
  for (double delta : {-1e-4, 1e-4}) {
    CHECK(lmm_loglik_spectral(y, x, fit.beta + delta, spec, decomp) <= fit.loglik + 1e-10);
  }
  // Stored loglik is consistent with the stored parameters.
  CHECK(fit.loglik ==
        Approx(lmm_loglik_spectral(y, x, fit.beta, spec, decomp)).margin(1e-8));
}

TEST_CASE("whitening i.i.d. data is a rescaling", "[lmm]") {
  const AdjacencyMatrix a = erdos_renyi_gnm(500, 500, 50);
  const auto decomp = eigendecompose(a);
  Rng rng(51);
  const Eigen::VectorXd v = random_vector(rng, 500);
  const auto [w, fit] = marginal_fit_and_whiten(v, decomp, 2);
  REQUIRE(fit.converged);
  const Eigen::VectorXd scaled = v / std::sqrt(fit.variance_components[0]);
  CHECK((w - scaled).cwiseAbs().maxCoeff() / scaled.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("whitening with the true covariance yields identity covariance", "[lmm]") {
  const AdjacencyMatrix toy = toy_network();
  DirectProcessConfig cfg;
  cfg.kappa = 0.7;
  cfg.alpha = 0.3;
  const Eigen::MatrixXd w =
      inverse_sqrt(direct_t1_covariance(toy, cfg.kappa, cfg.alpha, 1.0, 1.0));
  const int reps = 4000;
  Eigen::MatrixXd samples(reps, 10);
  for (int r = 0; r < reps; ++r) {
    samples.row(r) =
        (w * simulate_direct(toy, cfg, derive_seed(60, {static_cast<std::uint64_t>(r)})))
            .transpose();
  }
  CHECK((empirical_covariance(samples) - Eigen::MatrixXd::Identity(10, 10))
            .cwiseAbs()
            .maxCoeff() < 0.1);
}

TEST_CASE("fit preconditions", "[lmm]") {
  const AdjacencyMatrix k2 = single_edge_network();
  Eigen::VectorXd y(2), x(2);
  y << 1.0, 2.0;
  x << 0.5, -0.5;
  CHECK_THROWS_AS(fit_lmm(y, x, k2, 2), ParameterError);  // n < d+3
  Eigen::MatrixXd directed = Eigen::MatrixXd::Zero(2, 2);
  directed(0, 1) = 1.0;
  CHECK_THROWS_AS(fit_lmm(y, x, AdjacencyMatrix(directed), 0), ContractError);
}
