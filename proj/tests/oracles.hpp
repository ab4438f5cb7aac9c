#pragma once
// Test-side reference computations, kept independent of the library
// algorithms they check.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rdreg/numkit.hpp"
#include "rdreg/exo.hpp"
#include "rdreg/plant_spec.hpp"

namespace oracle {

using rdreg::Matrix;

/// Eigenvalues of a symmetric matrix by shifted QR with modified
/// Gram-Schmidt factorization and deflation from the bottom.
inline std::vector<double> symmetric_qr_eigenvalues(Matrix a) {
  std::size_t n = a.rows();
  std::vector<double> out;
  while (n > 0) {
    if (n == 1) {
      out.push_back(a(0, 0));
      break;
    }
    int iter = 0;
    while (std::abs(a(n - 1, n - 2)) > 1e-15 * (std::abs(a(n - 1, n - 1)) + std::abs(a(n - 2, n - 2))) + 1e-300) {
      // Wilkinson shift from the trailing 2x2 block.
      const double d = 0.5 * (a(n - 2, n - 2) - a(n - 1, n - 1));
      const double b = a(n - 1, n - 2);
      const double sgn = d >= 0 ? 1.0 : -1.0;
      const double mu = a(n - 1, n - 1) - b * b / (d + sgn * std::hypot(d, b));
      Matrix q(n, n), r(n, n), s(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = a(i, j) - (i == j ? mu : 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = s(i, j);
        for (std::size_t k = 0; k < j; ++k) {
          double dotp = 0.0;
          for (std::size_t i = 0; i < n; ++i) dotp += q(i, k) * v[i];
          r(k, j) = dotp;
          for (std::size_t i = 0; i < n; ++i) v[i] -= dotp * q(i, k);
        }
        double nv = 0.0;
        for (double x : v) nv += x * x;
        nv = std::sqrt(nv);
        r(j, j) = nv;
        for (std::size_t i = 0; i < n; ++i) q(i, j) = nv > 0 ? v[i] / nv : (i == j ? 1.0 : 0.0);
      }
      Matrix next = r * q;
      for (std::size_t i = 0; i < n; ++i) next(i, i) += mu;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = next(i, j);
      if (++iter > 500) break;
    }
    out.push_back(a(n - 1, n - 1));
    Matrix smaller(n - 1, n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = 0; j + 1 < n; ++j) smaller(i, j) = a(i, j);
    a = smaller;
    --n;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Truncated Taylor series sum_{k < terms} (M t)^k / k!.
inline Matrix taylor_expm(const Matrix& m, double t, int terms = 20) {
  Matrix result = Matrix::identity(m.rows());
  Matrix term = Matrix::identity(m.rows());
  for (int k = 1; k < terms; ++k) {
    term = term * m * (t / k);
    result += term;
  }
  return result;
}

inline Matrix random_symmetric(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (double& x : m.data()) x = u(rng);
  return m;
}

/// The demonstration plant: d1 = [0, 5x], d2 = [0, 1], d3 = 0, d4 = [2, 0],
/// p = (cos 0.5t, sin 0.5t), w0 = sin(2 pi x) + 1.
inline rdreg::PlantSpec demo_plant(double a) {
  rdreg::PlantSpec p;
  p.a = a;
  p.tau = 0.2;
  p.d1 = [](double x) { return rdreg::Row2{0.0, 5.0 * x}; };
  p.d2 = {0.0, 1.0};
  p.d3 = {0.0, 0.0};
  p.w0 = [](double x) { return std::sin(2.0 * std::numbers::pi * x) + 1.0; };
  p.grid_m = 100;
  p.dt = 1e-3;
  return p;
}

inline rdreg::ExoSpec demo_exo() { return rdreg::ExoSpec::harmonic(0.5, {1.0, 0.0}, {2.0, 0.0}); }

/// Least-squares slope of log|v| against t (plain samples, no envelope).
inline double log_slope(const std::vector<double>& t, const std::vector<double>& v) {
  double mx = 0, my = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(v[i]) < 1e-300) continue;
    mx += t[i];
    my += std::log(std::abs(v[i]));
    ++n;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(v[i]) < 1e-300) continue;
    sxx += (t[i] - mx) * (t[i] - mx);
    sxy += (t[i] - mx) * (std::log(std::abs(v[i])) - my);
  }
  return sxy / sxx;
}

}  // namespace oracle
