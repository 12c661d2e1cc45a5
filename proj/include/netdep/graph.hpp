#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "netdep/errors.hpp"
#include "netdep/rng.hpp"

namespace netdep {

// Binary network structure A. Entries are stored as doubles restricted to
// {0,1} so the matrix plugs directly into the numeric pipelines; the symmetry
// flag always reflects the stored entries.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(Eigen::MatrixXd entries) : mat_(std::move(entries)) {
    if (mat_.rows() != mat_.cols() || mat_.rows() < 1) {
      throw ParameterError("adjacency matrix must be square and nonempty");
    }
    const int n = static_cast<int>(mat_.rows());
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double v = mat_(i, j);
        if (v != 0.0 && v != 1.0) {
          throw ParameterError("adjacency entries must be exactly 0 or 1 (found " +
                               std::to_string(v) + " at " + std::to_string(i) + "," +
                               std::to_string(j) + ")");
        }
      }
      if (mat_(j, j) != 0.0) {
        throw ParameterError("adjacency diagonal must be zero (self-loop at node " +
                             std::to_string(j) + ")");
      }
    }
    symmetric_ = mat_.isApprox(mat_.transpose(), 0.0);
  }

  // Builds a symmetric matrix from undirected edges given as (i,j) pairs.
  static AdjacencyMatrix from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 1) throw ParameterError("node count must be positive");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j] : edges) {
      if (i < 0 || j < 0 || i >= n || j >= n) {
        throw ParameterError("edge endpoint out of range: " + std::to_string(i) + "," +
                             std::to_string(j));
      }
      if (i == j) throw ParameterError("self-loop in edge list at node " + std::to_string(i));
      m(i, j) = 1.0;
      m(j, i) = 1.0;
    }
    return AdjacencyMatrix(std::move(m));
  }

  int n() const { return static_cast<int>(mat_.rows()); }
  bool symmetric() const { return symmetric_; }
  const Eigen::MatrixXd& matrix() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }

  // Number of undirected edges when symmetric, directed arcs otherwise.
  long edge_count() const {
    const double total = mat_.sum();
    return symmetric_ ? static_cast<long>(total / 2.0 + 0.5) : static_cast<long>(total + 0.5);
  }

  std::vector<std::vector<int>> neighbor_lists() const {
    std::vector<std::vector<int>> adj(n());
    for (int i = 0; i < n(); ++i) {
      for (int j = 0; j < n(); ++j) {
        if (mat_(i, j) != 0.0) adj[i].push_back(j);
      }
    }
    return adj;
  }

 private:
  Eigen::MatrixXd mat_;
  bool symmetric_;
};

// Eigenpairs of a symmetric adjacency matrix, eigenvalues sorted descending.
// Shared read-only by every likelihood that uses the spectral shortcut.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // orthonormal, columns aligned with eigenvalues
};

// Shortest-path lengths. Unreachable pairs carry the explicit sentinel rather
// than a large number, so arithmetic on infinite distances cannot happen silently.
struct GeodesicMatrix {
  static constexpr int kUnreachable = -1;
  Eigen::MatrixXi dist;

  bool reachable(int i, int j) const { return dist(i, j) != kUnreachable; }
};

// Samples a G(n,M) graph: exactly m distinct undirected edges drawn uniformly
// without replacement (Floyd's subset sampling over the upper triangle).
inline AdjacencyMatrix erdos_renyi_gnm(int n, long m, std::uint64_t seed) {
  if (n < 1) throw ParameterError("node count must be positive");
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  if (m < 0 || m > max_edges) {
    throw ParameterError("edge count " + std::to_string(m) + " outside [0, " +
                         std::to_string(max_edges) + "] for n=" + std::to_string(n));
  }
  Rng rng(seed);
  std::unordered_set<long long> chosen;
  chosen.reserve(static_cast<std::size_t>(m) * 2);
  for (long long j = max_edges - m; j < max_edges; ++j) {
    const long long t = static_cast<long long>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
  for (long long k : chosen) {
    // Decode linear index over the upper triangle, row-major with i < j.
    long long rem = k;
    int i = 0;
    while (rem >= n - 1 - i) {
      rem -= n - 1 - i;
      ++i;
    }
    const int j = i + 1 + static_cast<int>(rem);
    mat(i, j) = 1.0;
    mat(j, i) = 1.0;
  }
  return AdjacencyMatrix(std::move(mat));
}

// Breadth-first shortest-path lengths over out-edges.
inline GeodesicMatrix geodesic_distances(const AdjacencyMatrix& a) {
  const int n = a.n();
  const auto adj = a.neighbor_lists();
  GeodesicMatrix g;
  g.dist = Eigen::MatrixXi::Constant(n, n, GeodesicMatrix::kUnreachable);
  std::vector<int> queue(n);
  for (int s = 0; s < n; ++s) {
    int head = 0, tail = 0;
    g.dist(s, s) = 0;
    queue[tail++] = s;
    while (head < tail) {
      const int u = queue[head++];
      for (int v : adj[u]) {
        if (g.dist(s, v) == GeodesicMatrix::kUnreachable) {
          g.dist(s, v) = g.dist(s, u) + 1;
          queue[tail++] = v;
        }
      }
    }
  }
  return g;
}

// A^m with walk-count semantics: entry (i,j) is the number of length-m walks
// from i to j. Exact in 64-bit integers at the scales this library targets.
inline Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> matrix_power(
    const AdjacencyMatrix& a, int m) {
  if (m < 0) throw ParameterError("matrix power requires a nonnegative exponent");
  using MatI = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = a.n();
  MatI base = a.matrix().cast<std::int64_t>();
  MatI result = MatI::Identity(n, n);
  for (int k = 0; k < m; ++k) result = (result * base).eval();
  return result;
}

// Dense symmetric eigendecomposition with a deterministic orientation: for
// each eigenvector, the first component larger than 1e-12 in magnitude is made
// nonnegative. Equal eigenvalues keep the solver's relative order (stable sort),
// so e.g. the zero matrix decomposes to U = I.
inline SpectralDecomposition eigendecompose(const AdjacencyMatrix& a) {
  if (!a.symmetric()) {
    throw ContractError("eigendecompose requires a symmetric adjacency matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error("eigendecomposition failed to converge");
  }
  const int n = a.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return raw(i) > raw(j); });

  SpectralDecomposition d;
  d.eigenvalues.resize(n);
  d.eigenvectors.resize(n, n);
  for (int c = 0; c < n; ++c) {
    d.eigenvalues(c) = raw(order[c]);
    Eigen::VectorXd col = solver.eigenvectors().col(order[c]);
    for (int r = 0; r < n; ++r) {
      if (std::abs(col(r)) > 1e-12) {
        if (col(r) < 0.0) col = -col;
        break;
      }
    }
    d.eigenvectors.col(c) = col;
  }
  return d;
}

}  // namespace netdep
