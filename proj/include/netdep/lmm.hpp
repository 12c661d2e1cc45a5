#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "netdep/covariance.hpp"
#include "netdep/errors.hpp"
#include "netdep/graph.hpp"
#include "netdep/optim.hpp"

namespace netdep {

// Fitted linear mixed model with polynomial-in-adjacency covariance:
// Y ~ N(beta*X, sigma2_0*I + sigma2_1*A + ... + sigma2_d*A^d).
struct LmmFit {
  double beta = 0.0;
  std::vector<double> variance_components;  // sigma2_0 .. sigma2_d
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;

  int order() const { return static_cast<int>(variance_components.size()) - 1; }

  PolynomialCovarianceSpec covariance_spec() const {
    return PolynomialCovarianceSpec{order(), variance_components};
  }
};

/// Log-likelihood evaluated the slow way: V assembled by repeated matrix
/// multiplication and factorized by Cholesky. Serves as the non-spectral
/// route; no eigendecomposition is involved anywhere in this path.
inline double lmm_loglik_direct(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                double beta, const PolynomialCovarianceSpec& spec,
                                const AdjacencyMatrix& a) {
  spec.validate();
  if (!a.symmetric()) throw ContractError("lmm likelihood requires a symmetric network");
  const int n = a.n();
  if (y.size() != n || x.size() != n) {
    throw ParameterError("y and x must have one entry per node");
  }
  Eigen::MatrixXd v = spec.coefficients[0] * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int m = 1; m <= spec.order; ++m) {
    power = (power * a.matrix()).eval();
    v += spec.coefficients[m] * power;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) {
    throw DefinitenessError("polynomial covariance is not positive definite");
  }
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
  const Eigen::VectorXd resid = y - beta * x;
  const double quad = resid.dot(llt.solve(resid));
  constexpr double ln_two_pi = 1.8378770664093454835606594728112;
  return -0.5 * n * ln_two_pi - 0.5 * logdet - 0.5 * quad;
}

/// Log-likelihood through the spectral identity: with Z = U^T (Y - beta*X) and
/// s_i = sum_m sigma2_m lambda_i^m,
///   l = -(n/2) ln(2 pi) - (1/2) sum_i ln s_i - (1/2) sum_i Z_i^2 / s_i.
/// No matrix factorization or inversion is performed.
inline double lmm_loglik_spectral(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                  double beta, const PolynomialCovarianceSpec& spec,
                                  const SpectralDecomposition& decomp) {
  const int n = static_cast<int>(decomp.eigenvalues.size());
  if (y.size() != n || x.size() != n) {
    throw ParameterError("y and x must have one entry per node");
  }
  const Eigen::VectorXd s = polynomial_spectrum(decomp.eigenvalues, spec);
  const Eigen::VectorXd z = decomp.eigenvectors.transpose() * (y - beta * x);
  constexpr double ln_two_pi = 1.8378770664093454835606594728112;
  double loglik = -0.5 * n * ln_two_pi;
  for (int i = 0; i < n; ++i) {
    loglik -= 0.5 * (std::log(s(i)) + z(i) * z(i) / s(i));
  }
  return loglik;
}

namespace detail {

inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double softplus_inv(double v) {
  if (v > 30.0) return v;
  return std::log(std::expm1(std::max(v, 1e-300)));
}

// Unconstrained parameterization of the variance components: log for
// sigma2_0 (strictly positive), softplus for the higher orders (floored at 0).
inline std::vector<double> components_from_theta(const std::vector<double>& theta) {
  std::vector<double> c(theta.size());
  c[0] = std::exp(theta[0]);
  for (std::size_t m = 1; m < theta.size(); ++m) c[m] = softplus(theta[m]);
  return c;
}

inline std::vector<double> theta_from_components(const std::vector<double>& c) {
  std::vector<double> theta(c.size());
  theta[0] = std::log(std::max(c[0], 1e-12));
  for (std::size_t m = 1; m < c.size(); ++m) theta[m] = softplus_inv(std::max(c[m], 1e-8));
  return theta;
}

// The three multistart points, expressed as variance components:
//   1. all-equal: the sample variance split evenly across orders;
//   2. sigma2_0-dominant: nearly all mass on the independent component;
//   3. moments-matched: half on sigma2_0, half spread over the higher orders
//      scaled by the spectral moments mu_m = mean_i(lambda_i^m), which are the
//      mean diagonal contributions of A^m.
inline std::vector<std::vector<double>> lmm_multistart_points(
    int d, double sample_var, const Eigen::VectorXd& eigenvalues) {
  const double sv = std::max(sample_var, 1e-8);
  std::vector<std::vector<double>> starts;

  std::vector<double> equal(d + 1, sv / (d + 1));
  starts.push_back(equal);

  std::vector<double> dominant(d + 1, 0.01 * sv);
  dominant[0] = sv;
  starts.push_back(dominant);

  std::vector<double> matched(d + 1, 0.0);
  matched[0] = 0.5 * sv;
  for (int m = 1; m <= d; ++m) {
    const double mu_m = eigenvalues.array().pow(m).mean();
    matched[m] = (0.5 * sv) / (d * std::max(mu_m, 1.0));
  }
  starts.push_back(matched);
  return starts;
}

struct ProfiledEval {
  double loglik;
  double beta;
};

// Spectral likelihood with beta profiled out by generalized least squares:
// beta_hat = (sum xt_i yt_i / s_i) / (sum xt_i^2 / s_i). Returns -inf when the
// candidate components fail positive definiteness against the spectrum.
inline ProfiledEval profiled_spectral_loglik(const Eigen::VectorXd& ytil,
                                             const Eigen::VectorXd& xtil,
                                             const Eigen::VectorXd& eigenvalues,
                                             const std::vector<double>& components,
                                             bool profile_beta) {
  const int n = static_cast<int>(ytil.size());
  const int d = static_cast<int>(components.size()) - 1;
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) {
    const double lam = eigenvalues(i);
    double acc = components[d];
    for (int m = d - 1; m >= 0; --m) acc = acc * lam + components[m];
    if (!(acc > 0.0)) return {-std::numeric_limits<double>::infinity(), 0.0};
    s(i) = acc;
  }
  double beta = 0.0;
  if (profile_beta) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += xtil(i) * ytil(i) / s(i);
      den += xtil(i) * xtil(i) / s(i);
    }
    beta = den > 0.0 ? num / den : 0.0;
  }
  constexpr double ln_two_pi = 1.8378770664093454835606594728112;
  double loglik = -0.5 * n * ln_two_pi;
  for (int i = 0; i < n; ++i) {
    const double r = ytil(i) - beta * xtil(i);
    loglik -= 0.5 * (std::log(s(i)) + r * r / s(i));
  }
  return {loglik, beta};
}

inline LmmFit fit_lmm_impl(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                           const SpectralDecomposition& decomp, int d, bool profile_beta) {
  const int n = static_cast<int>(decomp.eigenvalues.size());
  if (d < 0) throw ParameterError("lmm order must be nonnegative");
  if (n < d + 3) {
    throw ParameterError("lmm fit requires n >= d+3 (n=" + std::to_string(n) +
                         ", d=" + std::to_string(d) + ")");
  }
  if (y.size() != n || (profile_beta && x.size() != n)) {
    throw ParameterError("y and x must have one entry per node");
  }

  const Eigen::VectorXd ytil = decomp.eigenvectors.transpose() * y;
  const Eigen::VectorXd xtil =
      profile_beta ? (decomp.eigenvectors.transpose() * x).eval() : Eigen::VectorXd::Zero(n).eval();

  auto objective = [&](const std::vector<double>& theta) {
    return profiled_spectral_loglik(ytil, xtil, decomp.eigenvalues,
                                    components_from_theta(theta), profile_beta)
        .loglik;
  };

  const double sample_var = (y.array() - y.mean()).square().sum() / std::max(n - 1, 1);
  LmmFit fit;
  NelderMeadResult best;
  for (const auto& start : lmm_multistart_points(d, sample_var, decomp.eigenvalues)) {
    NelderMeadResult run = nelder_mead_maximize(objective, theta_from_components(start),
                                                /*step=*/0.5, /*tol=*/1e-8, /*max_iter=*/500);
    fit.iterations += run.iterations;
    if (run.value > best.value || best.x.empty()) {
      best = run;
    }
  }

  fit.variance_components = components_from_theta(best.x);
  const ProfiledEval final_eval = profiled_spectral_loglik(
      ytil, xtil, decomp.eigenvalues, fit.variance_components, profile_beta);
  fit.beta = final_eval.beta;
  fit.loglik = final_eval.loglik;
  fit.converged = best.converged && std::isfinite(fit.loglik);
  return fit;
}

}  // namespace detail

/// Maximum likelihood fit of (beta, sigma2_0..sigma2_d) by Nelder-Mead over the
/// transformed variance components with beta profiled out in closed form at
/// every step. Three documented multistart points; convergence when the
/// simplex objective spread drops below 1e-8 or after 500 iterations.
inline LmmFit fit_lmm(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                      const SpectralDecomposition& decomp, int d) {
  return detail::fit_lmm_impl(y, x, decomp, d, /*profile_beta=*/true);
}

inline LmmFit fit_lmm(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                      const AdjacencyMatrix& a, int d) {
  if (!a.symmetric()) throw ContractError("lmm fit requires a symmetric network");
  return fit_lmm(y, x, eigendecompose(a), d);
}

/// Fits the variance components of a single variable (mean fixed at zero) and
/// returns the pre-whitened vector inverse_sqrt(V_hat) * v together with the fit.
inline std::pair<Eigen::VectorXd, LmmFit> marginal_fit_and_whiten(
    const Eigen::VectorXd& v, const SpectralDecomposition& decomp, int d) {
  LmmFit fit = detail::fit_lmm_impl(v, Eigen::VectorXd(), decomp, d, /*profile_beta=*/false);
  const Eigen::VectorXd s = polynomial_spectrum(decomp.eigenvalues, fit.covariance_spec());
  const Eigen::VectorXd whitened =
      apply_spectral_filter(decomp, s.array().rsqrt(), v);
  return {whitened, std::move(fit)};
}

inline std::pair<Eigen::VectorXd, LmmFit> marginal_fit_and_whiten(const Eigen::VectorXd& v,
                                                                  const AdjacencyMatrix& a,
                                                                  int d) {
  if (!a.symmetric()) throw ContractError("lmm fit requires a symmetric network");
  return marginal_fit_and_whiten(v, eigendecompose(a), d);
}

}  // namespace netdep
