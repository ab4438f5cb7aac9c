#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rdreg/numkit.hpp"

namespace rdreg {

/// Neumann Laplacian eigenpairs on [0, 1]: lambda_n = (n pi)^2 with
/// phi_0 = 1 and phi_n = sqrt(2) cos(n pi x).
struct ModalBasis {
  int order = 0;     // truncation order N used for gain design
  int max_mode = 0;  // highest mode kept for diagnostics, >= order
  UniformGrid grid;
  std::vector<double> eigenvalues;
  std::vector<ScalarGrid> modes;

  static double eigenvalue(int n) {
    const double k = n * std::numbers::pi;
    return k * k;
  }

  static double eigenfunction(int n, double x) {
    return n == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(n * std::numbers::pi * x);
  }

  /// phi_n(1) = (-1)^n sqrt(2) for n >= 1.
  static double value_at_one(int n) { return n == 0 ? 1.0 : (n % 2 ? -std::numbers::sqrt2 : std::numbers::sqrt2); }
  static double value_at_zero(int n) { return n == 0 ? 1.0 : std::numbers::sqrt2; }

  int dimension() const noexcept { return order + 1; }
};

inline ModalBasis build_basis(int max_mode, std::size_t grid_m, int order = -1) {
  require(max_mode >= 0, "build_basis: max_mode must be >= 0");
  require(grid_m >= 2 && grid_m % 2 == 0, "build_basis: grid intervals must be even and >= 2");
  if (order < 0) order = max_mode;
  require(order <= max_mode, "build_basis: order exceeds max_mode");
  ModalBasis b;
  b.order = order;
  b.max_mode = max_mode;
  b.grid = UniformGrid(grid_m);
  for (int n = 0; n <= max_mode; ++n) {
    b.eigenvalues.push_back(ModalBasis::eigenvalue(n));
    b.modes.push_back(sample(b.grid, [n](double x) { return ModalBasis::eigenfunction(n, x); }));
  }
  return b;
}

/// Smallest N >= 0 with lambda_{N+1} > a + delta, i.e. every discarded mode
/// n > N satisfies -lambda_n + a < -delta.
inline int min_truncation(double a, double delta) {
  require(delta > 0.0, "min_truncation: delta must be positive");
  int n = 0;
  while (ModalBasis::eigenvalue(n + 1) <= a + delta) ++n;
  return n;
}

inline double project(const ScalarGrid& f, const ModalBasis& basis, int n) {
  if (n < 0 || n > basis.max_mode) throw ContractError("project: mode index out of range");
  require(f.grid == basis.grid, "project: grid mismatch");
  const auto w = quadrature_weights(f.grid);
  const auto& phi = basis.modes[static_cast<std::size_t>(n)];
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * phi[i];
  return s;
}

inline Row2 project(const RowGrid& f, const ModalBasis& basis, int n) {
  if (n < 0 || n > basis.max_mode) throw ContractError("project: mode index out of range");
  require(f.grid == basis.grid, "project: grid mismatch");
  const auto w = quadrature_weights(f.grid);
  const auto& phi = basis.modes[static_cast<std::size_t>(n)];
  Row2 s{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) s = s + (w[i] * phi[i]) * f[i];
  return s;
}

/// Modal coordinates [<f, phi_0>, ..., <f, phi_N>] for the design order N.
inline std::vector<double> project_leading(const ScalarGrid& f, const ModalBasis& basis) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(basis.order + 1));
  for (int n = 0; n <= basis.order; ++n) out.push_back(project(f, basis, n));
  return out;
}

}  // namespace rdreg
