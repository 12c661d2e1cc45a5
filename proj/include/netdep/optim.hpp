#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace netdep {

struct NelderMeadResult {
  std::vector<double> x;
  double value = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

// Standard Nelder-Mead simplex, maximizing. Stops when the best-to-worst
// objective spread falls below `tol` or after `max_iter` iterations. The
// objective may return -inf for infeasible points.
inline NelderMeadResult nelder_mead_maximize(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, double step, double tol, int max_iter) {
  const std::size_t dim = start.size();
  const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

  std::vector<std::vector<double>> pts(dim + 1, start);
  for (std::size_t k = 0; k < dim; ++k) pts[k + 1][k] += step;
  std::vector<double> vals(dim + 1);
  for (std::size_t k = 0; k <= dim; ++k) vals[k] = objective(pts[k]);

  NelderMeadResult result;
  std::vector<std::size_t> order(dim + 1);
  for (; result.iterations < max_iter; ++result.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    const std::size_t best = order[0], worst = order[dim], second_worst = order[dim - 1];

    if (std::isfinite(vals[best]) && std::isfinite(vals[worst]) &&
        vals[best] - vals[worst] < tol) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += pts[k][j] / static_cast<double>(dim);
    }
    auto blend = [&](double coeff) {
      std::vector<double> p(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        p[j] = centroid[j] + coeff * (centroid[j] - pts[worst][j]);
      }
      return p;
    };

    const std::vector<double> refl = blend(reflect);
    const double refl_val = objective(refl);
    if (refl_val > vals[best]) {
      const std::vector<double> exp_pt = blend(expand);
      const double exp_val = objective(exp_pt);
      if (exp_val > refl_val) {
        pts[worst] = exp_pt;
        vals[worst] = exp_val;
      } else {
        pts[worst] = refl;
        vals[worst] = refl_val;
      }
    } else if (refl_val > vals[second_worst]) {
      pts[worst] = refl;
      vals[worst] = refl_val;
    } else {
      const std::vector<double> con = blend(-contract);
      const double con_val = objective(con);
      if (con_val > vals[worst]) {
        pts[worst] = con;
        vals[worst] = con_val;
      } else {
        for (std::size_t k = 0; k <= dim; ++k) {
          if (k == best) continue;
          for (std::size_t j = 0; j < dim; ++j) {
            pts[k][j] = pts[best][j] + shrink * (pts[k][j] - pts[best][j]);
          }
          vals[k] = objective(pts[k]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k <= dim; ++k) {
    if (vals[k] > vals[best]) best = k;
  }
  result.x = pts[best];
  result.value = vals[best];
  return result;
}

struct GoldenSectionResult {
  double x = 0.0;
  double value = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

// Golden-section search maximizing a unimodal objective on [lo, hi].
inline GoldenSectionResult golden_section_maximize(
    const std::function<double(double)>& objective, double lo, double hi, double tol) {
  const double inv_phi = 0.6180339887498949;
  GoldenSectionResult r;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  r.evaluations = 2;
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
    ++r.evaluations;
  }
  if (f1 >= f2) {
    r.x = x1;
    r.value = f1;
  } else {
    r.x = x2;
    r.value = f2;
  }
  return r;
}

}  // namespace netdep
