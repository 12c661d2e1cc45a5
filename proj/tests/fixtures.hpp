#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "netdep/graph.hpp"
#include "netdep/rng.hpp"

namespace netdep::testing {

// Documented 10-node fixture: a 5-ring with a 4-node tail hanging off node 1,
// a chord 2-6, and node 9 isolated. Small enough to enumerate walks by hand,
// rich enough to have distance-2 pairs, odd cycles, and an unreachable node.
inline AdjacencyMatrix toy_network() {
  return AdjacencyMatrix::from_edges(
      10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 5}, {5, 6}, {6, 7}, {7, 8}, {2, 6}});
}

inline AdjacencyMatrix path_network(int k) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < k; ++i) edges.emplace_back(i, i + 1);
  return AdjacencyMatrix::from_edges(k, edges);
}

inline AdjacencyMatrix complete_network(int k) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) edges.emplace_back(i, j);
  }
  return AdjacencyMatrix::from_edges(k, edges);
}

inline AdjacencyMatrix single_edge_network() { return path_network(2); }

inline AdjacencyMatrix cycle_network(int k) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < k; ++i) edges.emplace_back(i, (i + 1) % k);
  return AdjacencyMatrix::from_edges(k, edges);
}

// Brute-force walk counter: enumerates every length-m walk from i to j by
// depth-first expansion. Independent of any matrix arithmetic.
inline long long count_walks(const AdjacencyMatrix& a, int from, int to, int length) {
  if (length == 0) return from == to ? 1 : 0;
  long long total = 0;
  for (int v = 0; v < a.n(); ++v) {
    if (a(from, v) != 0.0) total += count_walks(a, v, to, length - 1);
  }
  return total;
}

// From-definition distance correlation: raw distance matrices, explicit
// double centering, no shortcuts shared with the library implementation.
inline double brute_force_dcorr(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.size());
  auto center = [n](const Eigen::VectorXd& v) {
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d(i, j) = std::abs(v(i) - v(j));
    }
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        c(i, j) = d(i, j) - d.row(i).mean() - d.col(j).mean() + d.mean();
      }
    }
    return c;
  };
  const Eigen::MatrixXd a = center(x);
  const Eigen::MatrixXd b = center(y);
  double dcov2 = 0.0, dvarx = 0.0, dvary = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      dcov2 += a(i, j) * b(i, j);
      dvarx += a(i, j) * a(i, j);
      dvary += b(i, j) * b(i, j);
    }
  }
  dcov2 /= static_cast<double>(n) * n;
  dvarx /= static_cast<double>(n) * n;
  dvary /= static_cast<double>(n) * n;
  if (dvarx <= 0.0 || dvary <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, dcov2 / std::sqrt(dvarx * dvary)));
}

inline Eigen::VectorXd random_vector(Rng& rng, int n, double sd = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal(0.0, sd);
  return v;
}

inline Eigen::MatrixXd random_spd_matrix(Rng& rng, int n) {
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = rng.normal();
  }
  Eigen::MatrixXd v = m * m.transpose() / n + 0.5 * Eigen::MatrixXd::Identity(n, n);
  return (v + v.transpose()) / 2.0;
}

// Elementwise Monte-Carlo standard error of a Gaussian covariance estimate:
// Var(C_ij) ~ (V_ii V_jj + V_ij^2) / R.
inline Eigen::MatrixXd covariance_mc_se(const Eigen::MatrixXd& v, int replicates) {
  const auto n = v.rows();
  Eigen::MatrixXd se(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      se(i, j) = std::sqrt((v(i, i) * v(j, j) + v(i, j) * v(i, j)) / replicates);
    }
  }
  return se;
}

}  // namespace netdep::testing
