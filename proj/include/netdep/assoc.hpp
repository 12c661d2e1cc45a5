#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "netdep/errors.hpp"
#include "netdep/rng.hpp"

namespace netdep {

enum class TestMethod { kOlsT, kDcorrPerm };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::kOlsT;
};

/// Simple linear regression of Y on X with intercept; two-sided t-test on the
/// slope with n-2 degrees of freedom.
inline TestResult ols_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || y.size() != n) throw ParameterError("ols_test requires n >= 3 paired values");
  const double x_mean = x.mean(), y_mean = y.mean();
  const Eigen::VectorXd xc = x.array() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double sxx = xc.squaredNorm();
  if (!(sxx > 0.0)) throw DegenerateRegressorError("regressor X is constant");
  const double slope = xc.dot(yc) / sxx;
  const double rss = (yc - slope * xc).squaredNorm();
  const int df = n - 2;
  const double se = std::sqrt(rss / df / sxx);

  TestResult result;
  result.method = TestMethod::kOlsT;
  if (se == 0.0) {
    result.statistic = std::numeric_limits<double>::infinity();
    result.p_value = 0.0;
    return result;
  }
  const double t = slope / se;
  boost::math::students_t dist(df);
  result.statistic = t;
  result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return result;
}

namespace detail {

// Double-centered pairwise absolute-difference matrix of a univariate sample.
inline Eigen::MatrixXd centered_distance_matrix(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd d(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) d(i, j) = std::abs(v(i) - v(j));
  }
  const Eigen::VectorXd row_mean = d.rowwise().mean();
  const double grand_mean = d.mean();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) d(i, j) += grand_mean - row_mean(i) - row_mean(j);
  }
  return d;
}

inline double centered_product_mean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto n = a.rows();
  return a.cwiseProduct(b).sum() / static_cast<double>(n * n);
}

inline double dcorr_from_moments(double dcov2, double dvar_x, double dvar_y) {
  if (!(dvar_x > 0.0) || !(dvar_y > 0.0)) return 0.0;
  const double r2 = dcov2 / std::sqrt(dvar_x * dvar_y);
  return std::min(1.0, std::sqrt(std::max(0.0, r2)));
}

}  // namespace detail

/// Sample distance correlation of two univariate samples (double-centered
/// distance matrices, V-statistic normalization). Returns 0 when either
/// distance variance is 0.
inline double distance_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != n) {
    throw ParameterError("distance correlation requires n >= 2 paired values");
  }
  const Eigen::MatrixXd a = detail::centered_distance_matrix(x);
  const Eigen::MatrixXd b = detail::centered_distance_matrix(y);
  return detail::dcorr_from_moments(detail::centered_product_mean(a, b),
                                    detail::centered_product_mean(a, a),
                                    detail::centered_product_mean(b, b));
}

/// Permutation test for distance correlation. Y is permuted with a seeded
/// shuffle (each permutation index gets its own derived seed) and the p-value
/// is (1 + #{permuted dCorr >= observed}) / (permutations + 1).
inline TestResult dcorr_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             int permutations, std::uint64_t seed) {
  if (permutations < 99) throw ParameterError("dcorr_test requires at least 99 permutations");
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != n) throw ParameterError("dcorr_test requires n >= 2 paired values");

  const Eigen::MatrixXd a = detail::centered_distance_matrix(x);
  const Eigen::MatrixXd b = detail::centered_distance_matrix(y);
  const double dvar_x = detail::centered_product_mean(a, a);
  const double dvar_y = detail::centered_product_mean(b, b);
  const double observed =
      detail::dcorr_from_moments(detail::centered_product_mean(a, b), dvar_x, dvar_y);

  // Permuting both indices of the centered matrix commutes with centering, so
  // each permuted statistic is a gather-product over the precomputed matrices.
  std::vector<int> perm(n);
  int exceed = 0;
  for (int p = 1; p <= permutations; ++p) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(p)}));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[i], perm[j]);
    }
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double* a_col = a.data() + static_cast<std::ptrdiff_t>(j) * n;
      const double* b_col = b.data() + static_cast<std::ptrdiff_t>(perm[j]) * n;
      for (int i = 0; i < n; ++i) sum += a_col[i] * b_col[perm[i]];
    }
    const double permuted = detail::dcorr_from_moments(
        sum / (static_cast<double>(n) * n), dvar_x, dvar_y);
    if (permuted >= observed) ++exceed;
  }

  TestResult result;
  result.method = TestMethod::kDcorrPerm;
  result.statistic = observed;
  result.p_value = (1.0 + exceed) / (permutations + 1.0);
  return result;
}

}  // namespace netdep
