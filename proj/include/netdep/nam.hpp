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

// Open feasibility interval for rho; the lower endpoint may be -infinity when
// the spectrum has no negative part.
struct RhoRange {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

// Weight matrix W of the network autocorrelation model together with its real
// spectrum. Raw adjacency is the default convention; a row-normalized variant
// is available. Both keep the spectrum real: raw requires a symmetric A, and
// the row-normalized W shares eigenvalues with the symmetric similarity
// D^{-1/2} A D^{-1/2} (zero rows of isolated nodes contribute zeros).
class NamWeights {
 public:
  static NamWeights raw(const AdjacencyMatrix& a, const SpectralDecomposition& decomp) {
    return NamWeights(a.matrix(), decomp.eigenvalues);
  }

  static NamWeights raw(const AdjacencyMatrix& a) {
    if (!a.symmetric()) {
      throw ContractError("raw NAM weights require a symmetric adjacency matrix");
    }
    return raw(a, eigendecompose(a));
  }

  static NamWeights row_normalized(const AdjacencyMatrix& a) {
    if (!a.symmetric()) {
      throw ContractError("row-normalized NAM weights require a symmetric adjacency matrix");
    }
    const int n = a.n();
    Eigen::VectorXd degree = a.matrix().rowwise().sum();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd inv_sqrt_deg(n);
    for (int i = 0; i < n; ++i) {
      if (degree(i) > 0.0) {
        w.row(i) = a.matrix().row(i) / degree(i);
        inv_sqrt_deg(i) = 1.0 / std::sqrt(degree(i));
      } else {
        inv_sqrt_deg(i) = 0.0;
      }
    }
    const Eigen::MatrixXd sym =
        inv_sqrt_deg.asDiagonal() * a.matrix() * inv_sqrt_deg.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
      throw Error("eigendecomposition of normalized weights failed");
    }
    return NamWeights(std::move(w), solver.eigenvalues().reverse());
  }

  const Eigen::MatrixXd& matrix() const { return w_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  int n() const { return static_cast<int>(w_.rows()); }

 private:
  NamWeights(Eigen::MatrixXd w, Eigen::VectorXd eigenvalues)
      : w_(std::move(w)), eigenvalues_(std::move(eigenvalues)) {}

  Eigen::MatrixXd w_;
  Eigen::VectorXd eigenvalues_;  // descending
};

/// Feasible open interval for rho: (1/lambda_min, 1/lambda_max) from the
/// extreme eigenvalues of W, with an unbounded endpoint where the spectrum has
/// no sign on that side.
inline RhoRange rho_feasible_range(const NamWeights& w) {
  const Eigen::VectorXd& lam = w.eigenvalues();
  const double lam_max = lam(0);
  const double lam_min = lam(lam.size() - 1);
  if (std::max(std::abs(lam_max), std::abs(lam_min)) < 1e-12) {
    throw DegenerateNetworkError("weight matrix has no nonzero eigenvalue");
  }
  RhoRange range;
  if (lam_max > 1e-12) range.hi = 1.0 / lam_max;
  if (lam_min < -1e-12) range.lo = 1.0 / lam_min;
  return range;
}

// Fitted network autocorrelation model Y = rho*W*Y + beta_nam*X + eps.
struct NamFit {
  double rho = 0.0;
  double beta_nam = 0.0;
  double sigma2 = 1.0;
  double loglik = -std::numeric_limits<double>::infinity();
  RhoRange rho_range;
  bool converged = false;
};

/// Log-likelihood of the network autocorrelation model,
///   -(n/2) ln(2 pi sigma2) + ln|det(I - rho W)| - ||(I-rho W)Y - beta X||^2 / (2 sigma2),
/// with the log-determinant computed spectrally as sum_i ln(1 - rho lambda_i).
inline double nam_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& x, double rho,
                         double beta_nam, double sigma2, const NamWeights& w) {
  const int n = w.n();
  if (y.size() != n || (x.size() != 0 && x.size() != n)) {
    throw ParameterError("y and x must have one entry per node");
  }
  if (!(sigma2 > 0.0)) throw ParameterError("nam likelihood requires sigma2 > 0");
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 1.0 - rho * w.eigenvalues()(i);
    if (!(t > 0.0)) {
      throw SingularityError("1 - rho*lambda is nonpositive at eigenvalue " +
                             std::to_string(w.eigenvalues()(i)) + " for rho=" +
                             std::to_string(rho));
    }
    logdet += std::log(t);
  }
  Eigen::VectorXd resid = y - rho * (w.matrix() * y);
  if (x.size() == n) resid -= beta_nam * x;
  constexpr double ln_two_pi = 1.8378770664093454835606594728112;
  return -0.5 * n * (ln_two_pi + std::log(sigma2)) + logdet -
         resid.squaredNorm() / (2.0 * sigma2);
}

namespace detail {

struct NamProfile {
  double beta = 0.0;
  double sigma2 = 0.0;
  double concentrated = -std::numeric_limits<double>::infinity();
};

// Concentrated likelihood at fixed rho: beta(rho) is the no-intercept OLS
// coefficient of (I - rho W)Y on X, sigma2(rho) = RSS/n.
inline NamProfile nam_profile(double rho, const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& wy, const Eigen::VectorXd& eigenvalues) {
  const int n = static_cast<int>(y.size());
  NamProfile p;
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 1.0 - rho * eigenvalues(i);
    if (!(t > 0.0)) return p;
    logdet += std::log(t);
  }
  Eigen::VectorXd ytil = y - rho * wy;
  if (x.size() == n) {
    const double xx = x.squaredNorm();
    p.beta = xx > 0.0 ? x.dot(ytil) / xx : 0.0;
    ytil -= p.beta * x;
  }
  p.sigma2 = std::max(ytil.squaredNorm() / n, 1e-280);
  constexpr double ln_two_pi = 1.8378770664093454835606594728112;
  p.concentrated =
      -0.5 * n * (ln_two_pi + std::log(p.sigma2)) + logdet - 0.5 * n;
  return p;
}

inline NamFit fit_nam_impl(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                           const NamWeights& w) {
  const int n = w.n();
  if (n < 3) throw ParameterError("nam fit requires n >= 3");
  if (y.size() != n) throw ParameterError("y must have one entry per node");
  if (x.size() != 0) {
    if (x.size() != n) throw ParameterError("x must have one entry per node");
    if (!(x.squaredNorm() > 0.0)) {
      throw DegenerateRegressorError("covariate X has no variation");
    }
  }

  NamFit fit;
  fit.rho_range = rho_feasible_range(w);
  double lo = fit.rho_range.lo;
  const double hi = fit.rho_range.hi;
  if (!std::isfinite(lo)) lo = -1e3 * std::max(std::abs(hi), 1.0);

  const Eigen::VectorXd wy = w.matrix() * y;
  auto concentrated = [&](double rho) {
    return nam_profile(rho, y, x, wy, w.eigenvalues()).concentrated;
  };

  const double width = hi - lo;
  const double margin = 1e-6 * width;
  const double a = lo + margin, b = hi - margin;

  // A concentrated likelihood that is flat across the bracket gives the
  // search nothing to work with; flag rather than report a fake optimum.
  double probe_min = std::numeric_limits<double>::infinity();
  double probe_max = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 4; ++k) {
    const double f = concentrated(a + (b - a) * k / 4.0);
    probe_min = std::min(probe_min, f);
    probe_max = std::max(probe_max, f);
  }
  const bool flat =
      !std::isfinite(probe_max) || probe_max - probe_min < 1e-10 * (1.0 + std::abs(probe_max));

  const GoldenSectionResult opt =
      golden_section_maximize(concentrated, a, b, 1e-10 * width);
  const NamProfile prof = nam_profile(opt.x, y, x, wy, w.eigenvalues());
  fit.rho = opt.x;
  fit.beta_nam = prof.beta;
  fit.sigma2 = prof.sigma2;
  fit.loglik = nam_loglik(y, x, fit.rho, fit.beta_nam, fit.sigma2, w);
  fit.converged = !flat && std::isfinite(fit.loglik);
  return fit;
}

}  // namespace detail

/// Maximum likelihood NAM fit: rho by golden-section search over the feasible
/// interval of the concentrated likelihood, beta and sigma2 assembled from the
/// profile at the optimum. Deterministic.
inline NamFit fit_nam(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                      const NamWeights& w) {
  if (x.size() == 0) throw ParameterError("fit_nam requires a covariate; use fit_nam_marginal");
  return detail::fit_nam_impl(y, x, w);
}

/// Covariate-free fit of Y = rho*W*Y + eps (mean fixed at zero), as used for
/// NAM-implied pre-whitening.
inline NamFit fit_nam_marginal(const Eigen::VectorXd& y, const NamWeights& w) {
  return detail::fit_nam_impl(y, Eigen::VectorXd(), w);
}

struct NamBetaTest {
  double statistic = 0.0;  // Wald z, or the LR statistic when lr_fallback is set
  double p_value = 1.0;
  bool lr_fallback = false;
};

/// Two-sided test of beta_nam = 0. Primary route is a Wald test with the
/// standard error taken from the numerically differenced observed information
/// at the optimum (central differences, relative step 1e-5). If that Hessian
/// is not usable, falls back to a likelihood-ratio test against the
/// covariate-free fit and flags the fallback.
inline NamBetaTest nam_beta_test(const NamFit& fit, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& x, const NamWeights& w) {
  if (!fit.converged) throw ContractError("nam_beta_test requires a converged fit");
  if (x.size() != w.n()) throw ParameterError("x must have one entry per node");

  auto safe_loglik = [&](double rho, double beta, double sigma2) {
    try {
      return nam_loglik(y, x, rho, beta, sigma2, w);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  const double p0[3] = {fit.rho, fit.beta_nam, fit.sigma2};
  double h[3];
  for (int k = 0; k < 3; ++k) h[k] = 1e-5 * std::max(1.0, std::abs(p0[k]));

  auto eval = [&](double d0, double d1, double d2) {
    return safe_loglik(p0[0] + d0, p0[1] + d1, p0[2] + d2);
  };

  Eigen::Matrix3d hessian;
  const double f0 = eval(0, 0, 0);
  bool usable = std::isfinite(f0);
  for (int k = 0; k < 3 && usable; ++k) {
    double dk[3] = {0, 0, 0};
    dk[k] = h[k];
    const double fp = eval(dk[0], dk[1], dk[2]);
    const double fm = eval(-dk[0], -dk[1], -dk[2]);
    hessian(k, k) = (fp - 2.0 * f0 + fm) / (h[k] * h[k]);
    usable = std::isfinite(fp) && std::isfinite(fm);
    for (int l = k + 1; l < 3 && usable; ++l) {
      double dl[3] = {0, 0, 0};
      dl[l] = h[l];
      const double fpp = eval(dk[0] + dl[0], dk[1] + dl[1], dk[2] + dl[2]);
      const double fpm = eval(dk[0] - dl[0], dk[1] - dl[1], dk[2] - dl[2]);
      const double fmp = eval(-dk[0] + dl[0], -dk[1] + dl[1], -dk[2] + dl[2]);
      const double fmm = eval(-dk[0] - dl[0], -dk[1] - dl[1], -dk[2] - dl[2]);
      hessian(k, l) = hessian(l, k) = (fpp - fpm - fmp + fmm) / (4.0 * h[k] * h[l]);
      usable = std::isfinite(fpp) && std::isfinite(fpm) && std::isfinite(fmp) &&
               std::isfinite(fmm);
    }
  }

  NamBetaTest result;
  if (usable) {
    const Eigen::Matrix3d observed_info = -hessian;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(observed_info);
    if (solver.info() == Eigen::Success && solver.eigenvalues()(0) > 0.0) {
      const double var_beta = observed_info.inverse()(1, 1);
      if (var_beta > 0.0) {
        const double z = fit.beta_nam / std::sqrt(var_beta);
        result.statistic = z;
        result.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
        return result;
      }
    }
  }

  const NamFit null_fit = fit_nam_marginal(y, w);
  const double lr = std::max(0.0, 2.0 * (fit.loglik - null_fit.loglik));
  result.statistic = lr;
  result.p_value = std::erfc(std::sqrt(lr / 2.0));  // chi-square(1) upper tail
  result.lr_fallback = true;
  return result;
}

/// Fits Y = rho*A*Y + eps to a single variable, builds the implied covariance
/// nam_covariance(A, rho_hat, sigma2_hat) and returns inverse_sqrt(V_hat) * v
/// with the fit. The whitening filter is applied spectrally:
/// V^{-1/2} = U diag((1 - rho*lambda)/sigma) U^T.
inline std::pair<Eigen::VectorXd, NamFit> nam_prewhiten(const Eigen::VectorXd& v,
                                                        const AdjacencyMatrix& a,
                                                        const SpectralDecomposition& decomp) {
  const NamWeights w = NamWeights::raw(a, decomp);
  NamFit fit = fit_nam_marginal(v, w);
  const double sigma = std::sqrt(fit.sigma2);
  const Eigen::VectorXd filter =
      (1.0 - fit.rho * decomp.eigenvalues.array()) / sigma;
  Eigen::VectorXd whitened = apply_spectral_filter(decomp, filter, v);
  return {std::move(whitened), std::move(fit)};
}

inline std::pair<Eigen::VectorXd, NamFit> nam_prewhiten(const Eigen::VectorXd& v,
                                                        const AdjacencyMatrix& a) {
  if (!a.symmetric()) throw ContractError("nam_prewhiten requires a symmetric network");
  return nam_prewhiten(v, a, eigendecompose(a));
}

}  // namespace netdep
