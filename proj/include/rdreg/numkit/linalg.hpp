#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "rdreg/numkit/matrix.hpp"

namespace rdreg {

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

class LuDecomposition {
 public:
  explicit LuDecomposition(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    require(lu_.is_square(), "LU of non-square matrix");
    const std::size_t n = lu_.rows();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double scale = std::max(lu_.max_abs(), 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
      min_pivot_ = std::min(min_pivot_, std::abs(lu_(p, k)) / scale);
      if (lu_(p, k) == 0.0) {
        singular_ = true;
        continue;
      }
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) / lu_(k, k);
        lu_(i, k) = f;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  /// Smallest |pivot| relative to max|A|; a cheap conditioning signal.
  double min_relative_pivot() const noexcept { return min_pivot_; }

  bool singular(double rel_tol = 1e-14) const noexcept {
    return singular_ || min_pivot_ <= rel_tol * static_cast<double>(lu_.rows());
  }

  Matrix solve(const Matrix& b) const {
    require(b.rows() == lu_.rows(), "LU solve: shape mismatch");
    if (singular_) throw SingularError("LU solve: matrix is singular");
    const std::size_t n = lu_.rows();
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = b(perm_[i], c);
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x(j, c);
        x(i, c) = s;
      }
      for (std::size_t i = n; i-- > 0;) {
        double s = x(i, c);
        for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x(j, c);
        x(i, c) = s / lu_(i, i);
      }
    }
    return x;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  double min_pivot_ = std::numeric_limits<double>::infinity();
  bool singular_ = false;
};

inline Matrix solve(const Matrix& a, const Matrix& b) {
  LuDecomposition lu(a);
  if (lu.singular()) throw SingularError("solve: matrix is numerically singular");
  return lu.solve(b);
}

inline Matrix inverse(const Matrix& a) { return solve(a, Matrix::identity(a.rows())); }

/// Lower Cholesky factor, or nullopt when the matrix is not positive definite.
inline std::optional<Matrix> cholesky(const Matrix& a) {
  require(a.is_square(), "cholesky: non-square matrix");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct SymEig {
  std::vector<double> values;  // ascending
  Matrix vectors;              // orthonormal columns, matching values
};

inline SymEig sym_eig(const Matrix& m) {
  if (!m.is_symmetric(1e-12)) throw ContractError("sym_eig: matrix is not symmetric");
  const std::size_t n = m.rows();
  Matrix a = m.symmetrized();
  Matrix v = Matrix::identity(n);
  const double scale = std::max(a.frobenius(), 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-16 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
  SymEig out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline double lambda_max(const Matrix& m) { return sym_eig(m).values.back(); }
inline double lambda_min(const Matrix& m) { return sym_eig(m).values.front(); }

/// Clip the spectrum of a symmetric matrix from below at `floor`.
inline Matrix psd_project(const Matrix& m, double floor) {
  const SymEig e = sym_eig(m);
  const std::size_t n = m.rows();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = std::max(e.values[k], floor);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += lam * e.vectors(i, k) * e.vectors(j, k);
  }
  return out.symmetrized();
}

// ---------------------------------------------------------------------------
// General (non-symmetric) eigenvalues: Hessenberg + shifted complex QR
// ---------------------------------------------------------------------------

inline std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  using cd = std::complex<double>;
  require(m.is_square(), "eigenvalues: non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return {};

  // Householder reduction to upper Hessenberg form.
  Matrix a = m;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a(k + 1, k) > 0) alpha = -alpha;
    std::vector<double> v(n, 0.0);
    v[k + 1] = a(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vv = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      s *= 2.0 / vv;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      s *= 2.0 / vv;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
    }
  }

  std::vector<cd> h(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h[i * n + j] = a(i, j);
  auto at = [&](std::size_t i, std::size_t j) -> cd& { return h[i * n + j]; };

  std::vector<cd> out;
  out.reserve(n);
  std::vector<double> cs(n);
  std::vector<cd> sn(n);
  std::size_t hi = n - 1;
  int iter = 0;
  const double eps = std::numeric_limits<double>::epsilon();
  while (true) {
    if (hi == 0) {
      out.push_back(at(0, 0));
      break;
    }
    std::size_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(at(lo, lo - 1));
      if (sub <= eps * (std::abs(at(lo, lo)) + std::abs(at(lo - 1, lo - 1))) || sub < 1e-300) break;
      --lo;
    }
    if (lo == hi) {
      out.push_back(at(hi, hi));
      --hi;
      iter = 0;
      continue;
    }
    if (++iter > 1000) throw Error("eigenvalues: QR iteration did not converge");

    // Wilkinson shift from the trailing 2x2 block, with an occasional
    // exceptional shift to break cycles.
    cd mu;
    if (iter % 11 == 0) {
      mu = at(hi, hi) + std::abs(at(hi, hi - 1));
    } else {
      const cd p = at(hi - 1, hi - 1), q = at(hi - 1, hi), r = at(hi, hi - 1), s = at(hi, hi);
      const cd tr = p + s, det = p * s - q * r;
      const cd disc = std::sqrt(tr * tr / 4.0 - det);
      const cd l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
      mu = std::abs(l1 - s) < std::abs(l2 - s) ? l1 : l2;
    }
    for (std::size_t k = lo; k <= hi; ++k) at(k, k) -= mu;
    for (std::size_t k = lo; k < hi; ++k) {
      const cd x = at(k, k), y = at(k + 1, k);
      const double r = std::hypot(std::abs(x), std::abs(y));
      double c;
      cd s;
      if (std::abs(x) == 0.0) {
        c = 0.0;
        s = 1.0;
      } else {
        c = std::abs(x) / r;
        s = (x / std::abs(x)) * std::conj(y) / r;
      }
      cs[k] = c;
      sn[k] = s;
      for (std::size_t j = k; j <= hi; ++j) {
        const cd u = at(k, j), w = at(k + 1, j);
        at(k, j) = c * u + s * w;
        at(k + 1, j) = -std::conj(s) * u + c * w;
      }
    }
    for (std::size_t k = lo; k < hi; ++k) {
      const double c = cs[k];
      const cd s = sn[k];
      for (std::size_t i = lo; i <= std::min(k + 1, hi); ++i) {
        const cd u = at(i, k), w = at(i, k + 1);
        at(i, k) = u * c + w * std::conj(s);
        at(i, k + 1) = -u * s + w * c;
      }
    }
    for (std::size_t k = lo; k <= hi; ++k) at(k, k) += mu;
  }
  return out;
}

/// Largest real part over the spectrum.
inline double spectral_abscissa(const Matrix& m) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigenvalues(m)) best = std::max(best, z.real());
  return best;
}

// ---------------------------------------------------------------------------
// Matrix exponentials
// ---------------------------------------------------------------------------

/// e^{M t} by scaling and squaring with an order-8 Taylor polynomial.
inline Matrix expm(const Matrix& m, double t) {
  require(m.is_square(), "expm: non-square matrix");
  Matrix a = m * t;
  const double norm = a.max_abs() * static_cast<double>(a.rows());
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a *= std::ldexp(1.0, -squarings);
  const std::size_t n = a.rows();
  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int k = 1; k <= 8; ++k) {
    term = term * a * (1.0 / k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// e^{M t} for a 2x2 matrix. Traceless generators (the harmonic exosystem,
/// the rotation G_c and the companion S_c(theta)) use the exact Cayley-Hamilton
/// form e^{Mt} = c(t) I + s(t) M, with M^2 = -det(M) I.
inline Matrix expm2(const Matrix& m, double t) {
  require(m.rows() == 2 && m.cols() == 2, "expm2: need a 2x2 matrix");
  const double scale = std::max(m.max_abs(), 1e-300);
  if (std::abs(m.trace()) > 1e-14 * scale) return expm(m, t);

  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double c, s;
  if (det > 0.0) {
    const double w = std::sqrt(det);
    const double wt = w * t;
    c = std::cos(wt);
    s = std::abs(wt) < 1e-4 ? t * (1.0 - wt * wt / 6.0) : std::sin(wt) / w;
  } else if (det < 0.0) {
    const double w = std::sqrt(-det);
    const double wt = w * t;
    c = std::cosh(wt);
    s = std::abs(wt) < 1e-4 ? t * (1.0 + wt * wt / 6.0) : std::sinh(wt) / w;
  } else {
    c = 1.0;
    s = t;
  }
  return Matrix{{c + s * m(0, 0), s * m(0, 1)}, {s * m(1, 0), c + s * m(1, 1)}};
}

// ---------------------------------------------------------------------------
// Lyapunov equation
// ---------------------------------------------------------------------------

/// Solve F^T Q + Q F = -W for symmetric Q.
inline Matrix lyap_solve(const Matrix& f, const Matrix& w) {
  require(f.is_square() && w.rows() == f.rows() && w.cols() == f.cols(), "lyap_solve: shape mismatch");
  if (!w.is_symmetric(1e-12)) throw ContractError("lyap_solve: W must be symmetric");
  const std::size_t n = f.rows();
  const std::size_t nn = n * n;
  Matrix op(nn, nn);
  // (F^T Q + Q F)(i,j) = sum_k F(k,i) Q(k,j) + Q(i,k) F(k,j)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        op(i * n + j, k * n + j) += f(k, i);
        op(i * n + j, i * n + k) += f(k, j);
      }
  Matrix rhs(nn, 1);
  for (std::size_t k = 0; k < nn; ++k) rhs(k, 0) = -w.data()[k];
  LuDecomposition lu(op);
  if (lu.singular(1e-12)) throw SingularError("lyap_solve: F and -F share an eigenvalue");
  const Matrix x = lu.solve(rhs);
  Matrix q(n, n);
  for (std::size_t k = 0; k < nn; ++k) q.data()[k] = x(k, 0);
  return q.symmetrized();
}

}  // namespace rdreg
