#pragma once

#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "rdreg/exo.hpp"
#include "rdreg/modal.hpp"
#include "rdreg/numkit.hpp"
#include "rdreg/plant_spec.hpp"

namespace rdreg {

/// Observer injection profile L(x) = sum_n l_n phi_n(x), evaluated exactly
/// (the solvers need it between grid nodes).
struct InjectionProfile {
  std::vector<double> gains;

  double operator()(double x) const {
    double s = 0.0;
    for (std::size_t n = 0; n < gains.size(); ++n) s += gains[n] * ModalBasis::eigenfunction(static_cast<int>(n), x);
    return s;
  }
};

inline ScalarGrid build_injection_profile(std::span<const double> gains, const ModalBasis& basis) {
  if (static_cast<int>(gains.size()) != basis.order + 1)
    throw ContractError("build_injection_profile: need N+1 gains");
  ScalarGrid out(basis.grid, 0.0);
  for (std::size_t n = 0; n < gains.size(); ++n)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += gains[n] * basis.modes[n][i];
  return out;
}

namespace detail {

template <class T>
struct SecondOrderTrack {
  std::vector<T> y;
  std::vector<T> dy;
};

/// Classical RK4 on y'' = accel(x, y) over the nodes of `grid`.
template <class T, class Accel>
SecondOrderTrack<T> integrate_second_order(UniformGrid grid, T y0, T dy0, Accel&& accel) {
  const double h = grid.spacing();
  SecondOrderTrack<T> out;
  out.y.reserve(grid.size());
  out.dy.reserve(grid.size());
  T y = y0, v = dy0;
  out.y.push_back(y);
  out.dy.push_back(v);
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    const double x = grid.node(i);
    const T k1y = v, k1v = accel(x, y);
    const T k2y = v + (0.5 * h) * k1v, k2v = accel(x + 0.5 * h, y + (0.5 * h) * k1y);
    const T k3y = v + (0.5 * h) * k2v, k3v = accel(x + 0.5 * h, y + (0.5 * h) * k2y);
    const T k4y = v + h * k3v, k4v = accel(x + h, y + h * k3y);
    y = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    out.y.push_back(y);
    out.dy.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Max over interior nodes of |y'' - accel(x, y)|, with y'' from the
/// fourth-order five-point stencil.
template <class Accel>
double interior_residual(const RowGrid& y, Accel&& accel) {
  const double h = y.grid.spacing();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < y.size(); ++i) {
    const Row2 d2 = (1.0 / (12.0 * h * h)) * ((-1.0) * y[i - 2] + 16.0 * y[i - 1] + (-30.0) * y[i] + 16.0 * y[i + 1] +
                                              (-1.0) * y[i + 2]);
    const Row2 r = d2 - accel(y.grid.node(i), y[i]);
    worst = std::max({worst, std::abs(r[0]), std::abs(r[1])});
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Regulator equations: Gamma'' = Gamma G - a Gamma - d1, Gamma'(0) = d2, Gamma(0) = d4
// ---------------------------------------------------------------------------

struct GammaSolution {
  RowGrid gamma;
  RowGrid slope;
  Row2 slope_at_one{0.0, 0.0};
};

inline GammaSolution solve_gamma(const PlantSpec& plant, const ExoSpec& exo, std::size_t grid_m) {
  const UniformGrid grid(grid_m);
  const Matrix& G = exo.G;
  const double a = plant.a;
  auto accel = [&](double x, const Row2& y) { return mul(y, G) - a * y - plant.d1(x); };
  auto track = detail::integrate_second_order<Row2>(grid, exo.d4, plant.d2, accel);
  GammaSolution s{RowGrid(grid, std::move(track.y)), RowGrid(grid, std::move(track.dy)), {}};
  s.slope_at_one = s.slope.back();
  return s;
}

inline double gamma_residual(const GammaSolution& s, const PlantSpec& plant, const ExoSpec& exo) {
  return interior_residual(s.gamma, [&](double x, const Row2& y) { return mul(y, exo.G) - plant.a * y - plant.d1(x); });
}

/// gamma_1 = (Gamma'(1) - d3) e^{G tau}.
inline Row2 gamma1(Row2 gamma_prime_1, Row2 d3, const Matrix& G, double tau) {
  return mul(gamma_prime_1 - d3, expm2(G, tau));
}

// ---------------------------------------------------------------------------
// Decoupling BVP: g'' = g (G_c - a I) - L(x) g(0), g'(0) = 0, g'(1) = -gamma_c e^{-G_c tau}
// ---------------------------------------------------------------------------

struct GSolution {
  RowGrid g;
  RowGrid slope;
  Row2 g0{0.0, 0.0};
  Row2 slope_at_zero{0.0, 0.0};
  Row2 slope_at_one{0.0, 0.0};
  std::complex<double> shooting_slope;  // u'(1) for nu = i w
};

/// Linear shooting along the eigenvector Psi = (1, i) of G_c (nu = i w):
/// g Psi = c u with u'' = (nu - a) u - L(x), u(0) = 1, u'(0) = 0, and c fixed
/// by the flux condition at x = 1. The conjugate direction gives the
/// conjugate solution, so g = [Re(g Psi), Im(g Psi)].
inline GSolution solve_g(double a, double omega, double tau, const InjectionProfile& profile, std::size_t grid_m) {
  using cd = std::complex<double>;
  require(omega > 0.0, "solve_g: omega must be positive");
  const UniformGrid grid(grid_m);
  const cd nu(0.0, omega);
  auto accel = [&](double x, const cd& u) { return (nu - a) * u - cd(profile(x), 0.0); };
  auto track = detail::integrate_second_order<cd>(grid, cd(1.0, 0.0), cd(0.0, 0.0), accel);

  double umax = 0.0;
  for (const cd& u : track.y) umax = std::max(umax, std::abs(u));
  const cd up1 = track.dy.back();
  if (std::abs(up1) <= 1e-10 * umax) throw ResonanceError("solve_g: u'(1) vanishes, the decoupling BVP is resonant");

  const Row2 target = -1.0 * mul(Row2{1.0, 0.0}, expm2(rotation_generator(omega), -tau));
  const cd coeff = cd(target[0], target[1]) / up1;

  GSolution s;
  s.g = RowGrid(grid);
  s.slope = RowGrid(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cd gv = coeff * track.y[i], dv = coeff * track.dy[i];
    s.g[i] = {gv.real(), gv.imag()};
    s.slope[i] = {dv.real(), dv.imag()};
  }
  s.g0 = s.g.front();
  s.slope_at_zero = s.slope.front();
  s.slope_at_one = s.slope.back();
  s.shooting_slope = up1;
  return s;
}

inline double g_residual(const GSolution& s, double a, double omega, const InjectionProfile& profile) {
  const Matrix shifted = rotation_generator(omega) - a * Matrix::identity(2);
  return interior_residual(s.g, [&](double x, const Row2& y) { return mul(y, shifted) - profile(x) * s.g0; });
}

/// Largest deviation from g'(0) = 0 and g'(1) = -gamma_c e^{-G_c tau}.
inline double g_boundary_residual(const GSolution& s, double omega, double tau) {
  const Row2 target = -1.0 * mul(Row2{1.0, 0.0}, expm2(rotation_generator(omega), -tau));
  const Row2 r1 = s.slope_at_one - target;
  return std::max({std::abs(s.slope_at_zero[0]), std::abs(s.slope_at_zero[1]), std::abs(r1[0]), std::abs(r1[1])});
}

// ---------------------------------------------------------------------------
// Controller map: f'' = f S_c(theta) - a f - L(x) f(0), f'(0) = 0, f(0) = gamma_c
// ---------------------------------------------------------------------------

struct FSolution {
  double theta = 0.0;
  RowGrid f;
  RowGrid slope;
  Row2 slope_at_one{0.0, 0.0};
};

inline FSolution solve_f(double theta, double a, const InjectionProfile& profile, std::size_t grid_m) {
  require(theta >= 0.0, "solve_f: theta must be >= 0 (clamp estimates first)");
  const UniformGrid grid(grid_m);
  const Matrix m = companion(theta) - a * Matrix::identity(2);
  const Row2 gamma_c{1.0, 0.0};
  auto accel = [&](double x, const Row2& y) { return mul(y, m) - profile(x) * gamma_c; };
  auto track = detail::integrate_second_order<Row2>(grid, gamma_c, Row2{0.0, 0.0}, accel);
  FSolution s{theta, RowGrid(grid, std::move(track.y)), RowGrid(grid, std::move(track.dy)), {}};
  s.slope_at_one = s.slope.back();
  return s;
}

inline double f_residual(const FSolution& s, double a, const InjectionProfile& profile) {
  const Matrix m = companion(s.theta) - a * Matrix::identity(2);
  return interior_residual(s.f, [&](double x, const Row2& y) { return mul(y, m) - profile(x) * Row2{1.0, 0.0}; });
}

// ---------------------------------------------------------------------------
// Bundled snapshot of all function-valued maps (truth side, diagnostics)
// ---------------------------------------------------------------------------

struct RegulatorMaps {
  GammaSolution gamma;
  Row2 gamma1{0.0, 0.0};
  GSolution g;
  FSolution f;
  Matrix T;
  ScalarGrid injection;
  CanonicalHarmonic harmonic;
};

inline RegulatorMaps build_regulator_maps(const PlantSpec& plant, const ExoSpec& exo, std::span<const double> L,
                                          const ModalBasis& basis) {
  RegulatorMaps m;
  const std::size_t grid_m = basis.grid.intervals();
  const InjectionProfile profile{std::vector<double>(L.begin(), L.end())};
  m.gamma = solve_gamma(plant, exo, grid_m);
  m.gamma1 = gamma1(m.gamma.slope_at_one, plant.d3, exo.G, plant.tau);
  m.g = solve_g(plant.a, exo.omega, plant.tau, profile, grid_m);
  m.f = solve_f(exo.omega * exo.omega, plant.a, profile, grid_m);
  m.T = canonical_transform(exo.omega, m.g.g0);
  m.injection = build_injection_profile(L, basis);
  m.harmonic = harmonic_from_gamma(m.gamma1, exo);
  m.harmonic.T = m.T;
  return m;
}

/// Debug dump: columns x, component1, component2 with 17 significant digits.
inline void write_profile_csv(std::ostream& os, const RowGrid& f) {
  char buf[96];
  os << "x,component1,component2\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid.node(i), f[i][0], f[i][1]);
    os << buf;
  }
}

}  // namespace rdreg
