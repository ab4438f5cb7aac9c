#pragma once

#include <cmath>
#include <optional>

#include "rdreg/numkit.hpp"

namespace rdreg {

/// G_c = [[0, w], [-w, 0]], the canonical rotation generator.
inline Matrix rotation_generator(double omega) { return Matrix{{0.0, omega}, {-omega, 0.0}}; }

/// S_c(theta) = [[0, 1], [-theta, 0]], the observable companion form.
inline Matrix companion(double theta) { return Matrix{{0.0, 1.0}, {-theta, 0.0}}; }

/// Exosystem p' = G p, p(0) = p0, y_ref = d4 p. G must have spectrum {+-i w}.
struct ExoSpec {
  Matrix G;
  Vec2 p0{0.0, 0.0};
  Row2 d4{0.0, 0.0};
  double omega = 0.0;

  /// The generator [[0, -w], [w, 0]], for which p0 = (1, 0) yields p = (cos wt, sin wt).
  static ExoSpec harmonic(double omega, Vec2 p0, Row2 d4) {
    return ExoSpec{Matrix{{0.0, -omega}, {omega, 0.0}}, p0, d4, omega};
  }

  void validate() const {
    require(G.rows() == 2 && G.cols() == 2, "ExoSpec: G must be 2x2");
    require(omega > 0.0, "ExoSpec: omega must be positive");
    if (std::abs(G.trace()) > 1e-12) throw ContractError("ExoSpec: trace(G) must vanish");
    const double det = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
    if (std::abs(det - omega * omega) > 1e-9 * std::max(1.0, omega * omega))
      throw ContractError("ExoSpec: det(G) must equal omega^2");
  }

  Vec2 state(double t) const { return mul(expm2(G, t), p0); }
  double reference(double t) const { return dot(d4, state(t)); }
};

/// Real similarity V with G V = V G_c, built from the Krylov pair
/// (e1, -G e1 / w). Valid for any G with spectrum {+-i w}.
inline Matrix rotation_similarity(const ExoSpec& exo) {
  exo.validate();
  const Vec2 v1{1.0, 0.0};
  const Vec2 gv = mul(exo.G, v1);
  return Matrix{{v1[0], -gv[0] / exo.omega}, {v1[1], -gv[1] / exo.omega}};
}

/// gamma_1 p(t) = b cos(wt) + c sin(wt) rewritten as eta' = G_c eta,
/// gamma_c eta; optionally carrying the transform d = T eta.
struct CanonicalHarmonic {
  double omega = 0.0;
  double theta = 0.0;
  Matrix Gc;
  Row2 gamma_c{1.0, 0.0};
  Vec2 eta0{0.0, 0.0};  // (b, c)
  std::optional<Matrix> T;

  double b() const { return eta0[0]; }
  double c() const { return eta0[1]; }

  Vec2 eta(double t) const {
    const double cw = std::cos(omega * t), sw = std::sin(omega * t);
    return {b() * cw + c() * sw, c() * cw - b() * sw};
  }

  /// Canonical disturbance coordinates d(t) = T eta(t) (named dcan1, dcan2 in traces).
  Vec2 d(double t) const {
    if (!T) throw ContractError("CanonicalHarmonic: transform T not built");
    return mul(*T, eta(t));
  }

  Matrix Sc() const { return companion(theta); }
};

/// Amplitudes (b, c) from gamma_1 p(t) = gamma_1 e^{Gt} p0. Since G^2 = -w^2 I,
/// the signal is a pure harmonic with value b and slope c w at t = 0.
inline CanonicalHarmonic harmonic_from_gamma(Row2 gamma1, const ExoSpec& exo) {
  exo.validate();
  require(std::isfinite(gamma1[0]) && std::isfinite(gamma1[1]), "harmonic_from_gamma: non-finite gamma1");
  CanonicalHarmonic h;
  h.omega = exo.omega;
  h.theta = exo.omega * exo.omega;
  h.Gc = rotation_generator(exo.omega);
  h.eta0 = {dot(gamma1, exo.p0), dot(gamma1, mul(exo.G, exo.p0)) / exo.omega};
  const double scale = std::max(1.0, std::hypot(gamma1[0], gamma1[1]) * norm(exo.p0));
  if (std::hypot(h.eta0[0], h.eta0[1]) <= 1e-14 * scale)
    throw DegenerateError("harmonic_from_gamma: disturbance amplitude vanishes (b = c = 0)");
  return h;
}

/// Observability of (G_c, g0): det [g0; g0 G_c] = w |g0|^2 != 0.
inline bool check_observable(double omega, Row2 g0) {
  require(omega > 0.0, "check_observable: omega must be positive");
  const Row2 g1 = mul(g0, rotation_generator(omega));
  const double det = g0[0] * g1[1] - g0[1] * g1[0];
  const double n2 = g0[0] * g0[0] + g0[1] * g0[1];
  return std::abs(det) > 1e-12 * n2 * omega && n2 > 0.0;
}

/// T = [g0; g0 G_c]. Satisfies S_c(w^2) = T G_c T^{-1} and gamma_c = g0 T^{-1}.
inline Matrix canonical_transform(double omega, Row2 g0) {
  if (!check_observable(omega, g0)) throw SingularError("canonical_transform: (G_c, g0) is not observable");
  const Matrix gc = rotation_generator(omega);
  const Row2 g1 = mul(g0, gc);
  Matrix t{{g0[0], g0[1]}, {g1[0], g1[1]}};

  const Matrix tinv = inverse(t);
  const Matrix sc = t * gc * tinv;
  const Matrix expect = companion(omega * omega);
  const double scale = std::max(1.0, omega * omega);
  if ((sc - expect).max_abs() > 1e-10 * scale) throw SingularError("canonical_transform: similarity check failed");
  const Row2 gamma = mul(g0, tinv);
  if (std::abs(gamma[0] - 1.0) > 1e-10 || std::abs(gamma[1]) > 1e-10)
    throw SingularError("canonical_transform: output map check failed");
  return t;
}

}  // namespace rdreg
