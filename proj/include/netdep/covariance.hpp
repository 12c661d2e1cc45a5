#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "netdep/errors.hpp"
#include "netdep/graph.hpp"

namespace netdep {

// Polynomial-in-adjacency covariance V = sigma2_0*I + sigma2_1*A + ... + sigma2_d*A^d.
// Coefficients are variances: sigma2_0 must be positive, higher orders
// nonnegative. Nonnegativity alone does not guarantee positive definiteness
// (odd powers of negative eigenvalues), so the spectral check below remains
// the authoritative gate.
struct PolynomialCovarianceSpec {
  int order = 0;                     // d
  std::vector<double> coefficients;  // sigma2_0 .. sigma2_d

  void validate() const {
    if (order < 0) throw ParameterError("covariance order must be nonnegative");
    if (coefficients.size() != static_cast<std::size_t>(order) + 1) {
      throw ParameterError("covariance spec needs order+1 coefficients, got " +
                           std::to_string(coefficients.size()));
    }
    if (!(coefficients[0] > 0.0)) {
      throw ParameterError("sigma2_0 must be strictly positive");
    }
    for (std::size_t m = 1; m < coefficients.size(); ++m) {
      if (coefficients[m] < 0.0) {
        throw ParameterError("sigma2_" + std::to_string(m) + " must be nonnegative");
      }
    }
  }
};

// Per-eigenvalue variance s_i = sum_m sigma2_m * lambda_i^m (Horner form).
// Throws naming the offending eigenvalue if any s_i fails to be positive.
inline Eigen::VectorXd polynomial_spectrum(const Eigen::VectorXd& eigenvalues,
                                           const PolynomialCovarianceSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(eigenvalues.size());
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) {
    const double lam = eigenvalues(i);
    double acc = spec.coefficients[spec.order];
    for (int m = spec.order - 1; m >= 0; --m) acc = acc * lam + spec.coefficients[m];
    if (!(acc > 0.0)) {
      throw DefinitenessError("polynomial covariance not positive definite: variance " +
                              std::to_string(acc) + " at eigenvalue " + std::to_string(lam));
    }
    s(i) = acc;
  }
  return s;
}

/// V for the direct transmission process at t=1 on a symmetric network:
/// baseline_var*(kappa*A + alpha*I)^2 + noise_var*I.
inline Eigen::MatrixXd direct_t1_covariance(const AdjacencyMatrix& a, double kappa,
                                            double alpha, double baseline_var = 1.0,
                                            double noise_var = 1.0) {
  if (!a.symmetric()) {
    throw ContractError(
        "direct_t1_covariance requires a symmetric network; "
        "use direct_t1_covariance_asymmetric for directed ties");
  }
  const int n = a.n();
  const Eigen::MatrixXd mixing =
      kappa * a.matrix() + alpha * Eigen::MatrixXd::Identity(n, n);
  return baseline_var * (mixing * mixing) + noise_var * Eigen::MatrixXd::Identity(n, n);
}

/// Directed-tie variant: baseline_var*(kappa*A + alpha*I)(kappa*A + alpha*I)^T + noise_var*I.
inline Eigen::MatrixXd direct_t1_covariance_asymmetric(const AdjacencyMatrix& a,
                                                       double kappa, double alpha,
                                                       double baseline_var = 1.0,
                                                       double noise_var = 1.0) {
  const int n = a.n();
  const Eigen::MatrixXd mixing =
      kappa * a.matrix() + alpha * Eigen::MatrixXd::Identity(n, n);
  return baseline_var * (mixing * mixing.transpose()) +
         noise_var * Eigen::MatrixXd::Identity(n, n);
}

/// V = sum_m sigma2_m A^m assembled through the spectral form
/// U diag(s) U^T, where s_i = sum_m sigma2_m lambda_i^m.
inline Eigen::MatrixXd polynomial_covariance(const SpectralDecomposition& decomp,
                                             const PolynomialCovarianceSpec& spec) {
  const Eigen::VectorXd s = polynomial_spectrum(decomp.eigenvalues, spec);
  return decomp.eigenvectors * s.asDiagonal() * decomp.eigenvectors.transpose();
}

inline Eigen::MatrixXd polynomial_covariance(const AdjacencyMatrix& a,
                                             const PolynomialCovarianceSpec& spec) {
  if (!a.symmetric()) {
    throw ContractError("polynomial_covariance requires a symmetric adjacency matrix");
  }
  return polynomial_covariance(eigendecompose(a), spec);
}

/// Covariance implied by the network autocorrelation model,
/// sigma2 * (I - rho*A)^{-1} (I - rho*A)^{-T}, via U diag(1/(1-rho*lambda)^2) U^T.
inline Eigen::MatrixXd nam_covariance(const SpectralDecomposition& decomp, double rho,
                                      double sigma2) {
  if (!(sigma2 > 0.0)) throw ParameterError("nam covariance requires sigma2 > 0");
  const int n = static_cast<int>(decomp.eigenvalues.size());
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) {
    const double t = 1.0 - rho * decomp.eigenvalues(i);
    if (t == 0.0 || std::abs(t) < 1e-14) {
      throw SingularityError("I - rho*A is singular at eigenvalue " +
                             std::to_string(decomp.eigenvalues(i)) + " for rho=" +
                             std::to_string(rho));
    }
    s(i) = sigma2 / (t * t);
  }
  return decomp.eigenvectors * s.asDiagonal() * decomp.eigenvectors.transpose();
}

inline Eigen::MatrixXd nam_covariance(const AdjacencyMatrix& a, double rho, double sigma2) {
  if (!a.symmetric()) {
    throw ContractError("nam_covariance requires a symmetric adjacency matrix");
  }
  return nam_covariance(eigendecompose(a), rho, sigma2);
}

/// Symmetric inverse square root W of a symmetric positive-definite V, so that
/// W*V*W = I. Eigenvalues below the relative floor 1e-10 * lambda_max are
/// rejected rather than regularized.
inline Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() < 1) {
    throw ParameterError("inverse_sqrt requires a square matrix");
  }
  const double scale = v.cwiseAbs().maxCoeff();
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
    throw ContractError("inverse_sqrt requires a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(v);
  if (solver.info() != Eigen::Success) throw Error("inverse_sqrt eigendecomposition failed");
  const Eigen::VectorXd& lam = solver.eigenvalues();
  const double floor = 1e-10 * lam(lam.size() - 1);
  if (!(lam(0) > floor) || !(lam(lam.size() - 1) > 0.0)) {
    throw DefinitenessError("matrix is not positive definite enough to whiten: min eigenvalue " +
                            std::to_string(lam(0)));
  }
  const Eigen::VectorXd inv_root = lam.array().rsqrt();
  return solver.eigenvectors() * inv_root.asDiagonal() * solver.eigenvectors().transpose();
}

// Applies U diag(filter) U^T to a vector without forming the matrix. With
// filter = s^{-1/2} this is exactly the symmetric whitening transform of
// V = U diag(s) U^T, in O(n^2).
inline Eigen::VectorXd apply_spectral_filter(const SpectralDecomposition& decomp,
                                             const Eigen::VectorXd& filter,
                                             const Eigen::VectorXd& v) {
  return decomp.eigenvectors * (filter.asDiagonal() * (decomp.eigenvectors.transpose() * v));
}

}  // namespace netdep
