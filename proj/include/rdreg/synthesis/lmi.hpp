#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "rdreg/numkit.hpp"
#include "rdreg/synthesis/reduced.hpp"

namespace rdreg {

/// Decision matrices of the delay-dependent controller LMI.
struct LmiVariables {
  Matrix P1;  // symmetric positive definite
  Matrix P2;
  Matrix P3;
  Matrix S;  // symmetric positive definite
  Matrix R;  // symmetric positive definite
};

/// Assemble the symmetric 3(N+1) x 3(N+1) matrix Phi:
///   Phi11 = A'P2 + P2'A + 2 delta P1 + S - e^{-2 delta tau} R
///   Phi12 = P1 - P2' + A'P3        Phi13 = e^{-2 delta tau} R + P2' B K
///   Phi22 = -P3 - P3' + tau^2 R    Phi23 = P3' B K
///   Phi33 = -e^{-2 delta tau} (S + R)
inline Matrix build_phi(const ReducedModel& m, const Matrix& K, const LmiVariables& v) {
  const std::size_t n = m.dimension();
  for (const Matrix* x : {&v.P1, &v.P2, &v.P3, &v.S, &v.R})
    if (x->rows() != n || x->cols() != n) throw ContractError("build_phi: decision matrix dimension mismatch");
  if (K.rows() != 1 || K.cols() != n) throw ContractError("build_phi: K must be 1 x (N+1)");

  const double e = std::exp(-2.0 * m.delta * m.tau);
  const Matrix At = m.A.transpose();
  const Matrix BK = m.B * K;
  const Matrix P2t = v.P2.transpose();
  const Matrix P3t = v.P3.transpose();

  const Matrix f11 = At * v.P2 + P2t * m.A + 2.0 * m.delta * v.P1 + v.S - e * v.R;
  const Matrix f12 = v.P1 - P2t + At * v.P3;
  const Matrix f13 = e * v.R + P2t * BK;
  const Matrix f22 = -1.0 * v.P3 - P3t + m.tau * m.tau * v.R;
  const Matrix f23 = P3t * BK;
  const Matrix f33 = -e * (v.S + v.R);

  Matrix phi(3 * n, 3 * n);
  phi.set_block(0, 0, f11);
  phi.set_block(0, n, f12);
  phi.set_block(0, 2 * n, f13);
  phi.set_block(n, 0, f12.transpose());
  phi.set_block(n, n, f22);
  phi.set_block(n, 2 * n, f23);
  phi.set_block(2 * n, 0, f13.transpose());
  phi.set_block(2 * n, n, f23.transpose());
  phi.set_block(2 * n, 2 * n, f33);
  return phi.symmetrized();
}

struct LmiOptions {
  std::uint64_t seed = 1;
  int budget = 20000;     // total Newton iterations
  double floor = 1.0;     // P1, S, R >= floor I fixes the (homogeneous) scale
  double radius = 1e4;    // ||x|| <= radius keeps the search bounded
};

struct ControllerCertificate {
  bool feasible = false;
  LmiVariables vars;
  double phi_margin = 0.0;  // lambda_max(Phi)
  double min_eig_P1 = 0.0;
  double min_eig_S = 0.0;
  double min_eig_R = 0.0;
  int iterations = 0;
};

namespace detail {

/// Packs (P1, P2, P3, S, R) into a flat vector: symmetric blocks store
/// their upper triangle, general blocks every entry.
class LmiPacking {
 public:
  explicit LmiPacking(std::size_t n) : n_(n) {}

  std::size_t size() const { return 3 * n_ * (n_ + 1) / 2 + 2 * n_ * n_; }

  LmiVariables unpack(std::span<const double> x) const {
    std::size_t k = 0;
    LmiVariables v;
    v.P1 = take_sym(x, k);
    v.P2 = take_full(x, k);
    v.P3 = take_full(x, k);
    v.S = take_sym(x, k);
    v.R = take_sym(x, k);
    return v;
  }

  std::vector<double> pack(const LmiVariables& v) const {
    std::vector<double> x;
    put_sym(v.P1, x);
    put_full(v.P2, x);
    put_full(v.P3, x);
    put_sym(v.S, x);
    put_sym(v.R, x);
    return x;
  }

 private:
  Matrix take_sym(std::span<const double> x, std::size_t& k) const {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) m(i, j) = m(j, i) = x[k++];
    return m;
  }
  Matrix take_full(std::span<const double> x, std::size_t& k) const {
    Matrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) m(i, j) = x[k++];
    return m;
  }
  void put_sym(const Matrix& m, std::vector<double>& x) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) x.push_back(m(i, j));
  }
  void put_full(const Matrix& m, std::vector<double>& x) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) x.push_back(m(i, j));
  }

  std::size_t n_;
};

inline std::optional<double> log_det_pd(const Matrix& m) {
  const auto l = cholesky(m);
  if (!l) return std::nullopt;
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += std::log((*l)(i, i));
  return 2.0 * s;
}

inline Matrix inverse_pd(const Matrix& m) { return inverse(m).symmetrized(); }

}  // namespace detail

/// Maximise the LMI margin for fixed K with a log-barrier path-following
/// Newton method over z = (x, t):
///   t I - Phi(x) > 0,  P1, S, R > floor I,  radius^2 - |x|^2 > 0.
/// The certificate is re-checked from scratch, independent of the search.
inline ControllerCertificate certify_controller(const ReducedModel& m, const Matrix& K, const LmiOptions& opt = {}) {
  const std::size_t n = m.dimension();
  const detail::LmiPacking pack(n);
  const std::size_t nx = pack.size();
  const std::size_t nz = nx + 1;
  const Matrix In = Matrix::identity(n);
  const Matrix I3n = Matrix::identity(3 * n);

  // Constraint blocks are affine in z: F_j(z) = C_j + sum_i z_i D_ij.
  auto blocks = [&](std::span<const double> z) {
    const LmiVariables v = pack.unpack(z.first(nx));
    const double t = z[nx];
    return std::vector<Matrix>{t * I3n - build_phi(m, K, v), v.P1 - opt.floor * In, v.S - opt.floor * In,
                               v.R - opt.floor * In};
  };
  const std::vector<double> zero(nz, 0.0);
  const auto offsets = blocks(zero);
  std::vector<std::vector<Matrix>> deriv(nz);
  for (std::size_t i = 0; i < nz; ++i) {
    std::vector<double> e(nz, 0.0);
    e[i] = 1.0;
    auto bi = blocks(e);
    for (std::size_t j = 0; j < bi.size(); ++j) bi[j] -= offsets[j];
    deriv[i] = std::move(bi);
  }

  double weight = 1.0;
  auto barrier = [&](std::span<const double> z) -> std::optional<double> {
    double val = weight * z[nx];
    for (const Matrix& f : blocks(z)) {
      const auto ld = detail::log_det_pd(f);
      if (!ld) return std::nullopt;
      val -= *ld;
    }
    double xx = 0.0;
    for (std::size_t i = 0; i < nx; ++i) xx += z[i] * z[i];
    const double slack = opt.radius * opt.radius - xx;
    if (!(slack > 0.0)) return std::nullopt;
    return val - std::log(slack);
  };

  // Strictly feasible start: P1 = S = R = 2 floor I (+ seeded jitter), P2 = P3 = jitter.
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  LmiVariables v0{2.0 * opt.floor * In, Matrix(n, n), Matrix(n, n), 2.0 * opt.floor * In, 2.0 * opt.floor * In};
  for (Matrix* x : {&v0.P1, &v0.P2, &v0.P3, &v0.S, &v0.R})
    for (double& e : x->data()) e += opt.floor * jitter(rng);
  v0.P1 = psd_project(v0.P1.symmetrized(), 1.5 * opt.floor);
  v0.S = psd_project(v0.S.symmetrized(), 1.5 * opt.floor);
  v0.R = psd_project(v0.R.symmetrized(), 1.5 * opt.floor);
  std::vector<double> z = pack.pack(v0);
  z.push_back(lambda_max(build_phi(m, K, v0)) + 1.0);

  ControllerCertificate best;
  best.phi_margin = std::numeric_limits<double>::infinity();
  int iterations = 0;
  const double barrier_dim = static_cast<double>(3 * n + 3 * n + 1);

  auto record = [&](std::span<const double> zz) {
    const LmiVariables v = pack.unpack(zz.first(nx));
    const double margin = lambda_max(build_phi(m, K, v));
    if (margin < best.phi_margin) {
      best.phi_margin = margin;
      best.vars = v;
    }
  };

  for (int outer = 0; outer < 60 && iterations < opt.budget; ++outer) {
    for (int inner = 0; inner < 100 && iterations < opt.budget; ++inner) {
      ++iterations;
      const auto fs = blocks(z);
      std::vector<Matrix> finv;
      for (const Matrix& f : fs) finv.push_back(detail::inverse_pd(f));

      std::vector<double> grad(nz, 0.0);
      Matrix hess(nz, nz);
      grad[nx] += weight;
      // Cache F_j^{-1} D_ij.
      std::vector<std::vector<Matrix>> fd(nz);
      for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = 0; j < fs.size(); ++j) fd[i].push_back(finv[j] * deriv[i][j]);
      for (std::size_t i = 0; i < nz; ++i) {
        for (std::size_t j = 0; j < fs.size(); ++j) grad[i] -= fd[i][j].trace();
        for (std::size_t k = i; k < nz; ++k) {
          double h = 0.0;
          for (std::size_t j = 0; j < fs.size(); ++j) h += frobenius_inner(fd[i][j], fd[k][j].transpose());
          hess(i, k) = hess(k, i) = h;
        }
      }
      double xx = 0.0;
      for (std::size_t i = 0; i < nx; ++i) xx += z[i] * z[i];
      const double slack = opt.radius * opt.radius - xx;
      for (std::size_t i = 0; i < nx; ++i) {
        grad[i] += 2.0 * z[i] / slack;
        hess(i, i) += 2.0 / slack;
        for (std::size_t k = 0; k < nx; ++k) hess(i, k) += 4.0 * z[i] * z[k] / (slack * slack);
      }

      Matrix step;
      try {
        step = solve(hess, Matrix::column(grad));
      } catch (const SingularError&) {
        break;
      }
      double decrement = 0.0;
      for (std::size_t i = 0; i < nz; ++i) decrement += grad[i] * step(i, 0);
      if (decrement / 2.0 < 1e-10) break;

      const double f0 = *barrier(z);
      double s = 1.0;
      std::vector<double> trial(nz);
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t i = 0; i < nz; ++i) trial[i] = z[i] - s * step(i, 0);
        const auto ft = barrier(trial);
        if (ft && *ft <= f0 - 0.25 * s * decrement) {
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;
      z = trial;
    }
    record(z);
    if (barrier_dim / weight < 1e-9) break;
    weight *= 4.0;
  }

  best.iterations = iterations;
  if (!std::isfinite(best.phi_margin)) return best;
  best.min_eig_P1 = lambda_min(best.vars.P1);
  best.min_eig_S = lambda_min(best.vars.S);
  best.min_eig_R = lambda_min(best.vars.R);
  best.feasible =
      best.phi_margin <= -1e-8 && best.min_eig_P1 >= 1e-8 && best.min_eig_S >= 1e-8 && best.min_eig_R >= 1e-8;
  return best;
}

/// Left side of the observer inequality, Q(A+LC) + (A+LC)'Q + 2 delta Q.
inline Matrix observer_lmi(const ReducedModel& m, const Matrix& L, const Matrix& Q) {
  const Matrix F = m.A + L * m.C;
  return (Q * F + F.transpose() * Q + 2.0 * m.delta * Q).symmetrized();
}

struct ObserverCertificate {
  bool feasible = false;
  Matrix Q;
  double margin = 0.0;  // lambda_max of observer_lmi
  double min_eig_Q = 0.0;
  double abscissa = 0.0;  // spectral abscissa of A + LC
};

/// Q from (A + LC + delta I)' Q + Q (A + LC + delta I) = -I when A + LC
/// decays faster than delta.
inline ObserverCertificate certify_observer(const ReducedModel& m, const Matrix& L) {
  const std::size_t n = m.dimension();
  if (L.rows() != n || L.cols() != 1) throw ContractError("certify_observer: L must be (N+1) x 1");
  ObserverCertificate c;
  const Matrix F = m.A + L * m.C;
  c.abscissa = spectral_abscissa(F);
  if (!(c.abscissa < -m.delta)) return c;
  try {
    c.Q = lyap_solve(F + m.delta * Matrix::identity(n), Matrix::identity(n));
  } catch (const SingularError&) {
    return c;
  }
  c.margin = lambda_max(observer_lmi(m, L, c.Q));
  c.min_eig_Q = lambda_min(c.Q);
  c.feasible = c.margin <= -1e-8 && c.min_eig_Q >= 1e-8;
  return c;
}

}  // namespace rdreg
