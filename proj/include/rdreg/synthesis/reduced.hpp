#pragma once

#include <cmath>
#include <algorithm>
#include <numbers>
#include <span>
#include <vector>

#include "rdreg/modal.hpp"
#include "rdreg/numkit.hpp"

namespace rdreg {

/// Finite-dimensional part of the modal expansion:
/// A = diag(-lambda_n + a), B_n = phi_n(1), C_n = phi_n(0), n = 0..N.
struct ReducedModel {
  Matrix A;
  Matrix B;  // (N+1) x 1
  Matrix C;  // 1 x (N+1)
  int order = 0;
  double a = 0.0;
  double delta = 0.0;
  double tau = 0.0;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(order + 1); }
};

inline ReducedModel build_reduced(double a, double delta, double tau, int order) {
  require(order >= 0, "build_reduced: order must be >= 0");
  const std::size_t n = static_cast<std::size_t>(order + 1);
  ReducedModel m;
  m.order = order;
  m.a = a;
  m.delta = delta;
  m.tau = tau;
  m.A = Matrix(n, n);
  m.B = Matrix(n, 1);
  m.C = Matrix(1, n);
  for (int k = 0; k <= order; ++k) {
    const auto i = static_cast<std::size_t>(k);
    m.A(i, i) = -ModalBasis::eigenvalue(k) + a;
    m.B(i, 0) = ModalBasis::value_at_one(k);
    m.C(0, i) = ModalBasis::value_at_zero(k);
  }
  return m;
}

/// Real pole targets: mode k goes to min(open-loop value, -(delta + margin) - spread k).
/// Modes that already decay faster than the target stay where they are.
struct PoleTargets {
  double margin = 0.5;
  double spread = 0.3;

  std::vector<double> for_model(const ReducedModel& m) const {
    std::vector<double> t;
    for (int k = 0; k <= m.order; ++k) {
      const auto i = static_cast<std::size_t>(k);
      t.push_back(std::min(m.A(i, i), -(m.delta + margin) - spread * k));
    }
    return t;
  }
};

/// Gains g with spectrum(diag(alpha) + b g) = targets (or its dual).
/// Partial fractions of prod(s - mu_j) / prod(s - alpha_i) give
/// g_i b_i = -prod_j(alpha_i - mu_j) / prod_{l != i}(alpha_i - alpha_l).
inline std::vector<double> place_diagonal(std::span<const double> alpha, std::span<const double> b,
                                          std::span<const double> targets) {
  const std::size_t n = alpha.size();
  require(b.size() == n && targets.size() == n, "place_diagonal: size mismatch");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(b[i]) < 1e-14) throw SynthesisError("pole placement: uncontrollable mode");
    double num = 1.0, den = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      num *= alpha[i] - targets[j];
      if (j != i) {
        const double gap = alpha[i] - alpha[j];
        if (std::abs(gap) < 1e-12 * std::max(1.0, std::abs(alpha[i])))
          throw SynthesisError("pole placement: repeated open-loop mode");
        den *= gap;
      }
    }
    g[i] = -num / den / b[i];
  }
  return g;
}

namespace detail {
inline std::vector<double> diagonal_of(const Matrix& a) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.rows(); ++i) d.push_back(a(i, i));
  return d;
}
}  // namespace detail

/// Controller row K placing spec(A + B K).
inline Matrix design_K(const ReducedModel& m, const std::vector<double>& targets) {
  const auto alpha = detail::diagonal_of(m.A);
  const auto b = m.B.transpose();
  return Matrix::row(place_diagonal(alpha, b.data(), targets));
}

inline Matrix design_K(const ReducedModel& m, const PoleTargets& t = {}) { return design_K(m, t.for_model(m)); }

/// Observer column L placing spec(A + L C).
inline Matrix design_L(const ReducedModel& m, const std::vector<double>& targets) {
  const auto alpha = detail::diagonal_of(m.A);
  return Matrix::column(place_diagonal(alpha, m.C.data(), targets));
}

inline Matrix design_L(const ReducedModel& m, const PoleTargets& t = {1.0, 0.3}) {
  return design_L(m, t.for_model(m));
}

}  // namespace rdreg
