#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rdreg/exo.hpp"
#include "rdreg/numkit.hpp"

using namespace rdreg;

namespace {

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

}  // namespace

TEST(Matrix, BasicAlgebra) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
  EXPECT_EQ(a.transpose(), (Matrix{{1, 3}, {2, 4}}));
  EXPECT_DOUBLE_EQ(a.trace(), 5.0);
  EXPECT_EQ(a + b - b, a);
  EXPECT_FALSE(a.is_symmetric());
  EXPECT_TRUE(a.symmetrized().is_symmetric());
  Matrix big(4, 4);
  big.set_block(1, 2, a);
  EXPECT_EQ(big.block(1, 2, 2, 2), a);
}

TEST(Matrix, RowVectorHelpers) {
  const Matrix g{{0, 2}, {-2, 0}};
  const Row2 r = mul(Row2{1, 1}, g);
  EXPECT_DOUBLE_EQ(r[0], -2);
  EXPECT_DOUBLE_EQ(r[1], 2);
  const Vec2 v = mul(g, Vec2{1, 1});
  EXPECT_DOUBLE_EQ(v[0], 2);
  EXPECT_DOUBLE_EQ(v[1], -2);
}

TEST(LinearSolve, SolveAndInverse) {
  std::mt19937_64 rng(7);
  const Matrix a = oracle::random_matrix(5, 5, rng) + 5.0 * Matrix::identity(5);
  const Matrix x = oracle::random_matrix(5, 2, rng);
  EXPECT_LT(max_diff(solve(a, a * x), x), 1e-12);
  EXPECT_LT(max_diff(a * inverse(a), Matrix::identity(5)), 1e-12);
  EXPECT_THROW(solve(Matrix{{1, 2}, {2, 4}}, Matrix::identity(2)), SingularError);
}

TEST(LinearSolve, CholeskyDetectsDefiniteness) {
  EXPECT_TRUE(cholesky(Matrix{{4, 1}, {1, 3}}).has_value());
  EXPECT_FALSE(cholesky(Matrix{{1, 2}, {2, 1}}).has_value());
  const auto l = cholesky(Matrix{{4, 2}, {2, 5}});
  ASSERT_TRUE(l);
  EXPECT_LT(max_diff(*l * l->transpose(), Matrix{{4, 2}, {2, 5}}), 1e-14);
}

TEST(SymEig, IdentityHasUnitSpectrum) {
  const SymEig e = sym_eig(Matrix::identity(3));
  ASSERT_EQ(e.values.size(), 3u);
  for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(SymEig, DiagonalIsSortedAscending) {
  const double d[] = {5.0, -2.0};
  const SymEig e = sym_eig(Matrix::diagonal(d));
  EXPECT_DOUBLE_EQ(e.values[0], -2.0);
  EXPECT_DOUBLE_EQ(e.values[1], 5.0);
}

TEST(SymEig, MatchesIndependentShiftedQr) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = oracle::random_symmetric(6, rng, 3.0);
    const SymEig e = sym_eig(m);
    const auto ref = oracle::symmetric_qr_eigenvalues(m);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(e.values[i], ref[i], 1e-9) << "trial " << trial;
  }
}

TEST(SymEig, ReconstructionAndResidual) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 2u, 5u, 9u, 12u}) {
    const Matrix m = oracle::random_symmetric(n, rng, 2.0);
    const SymEig e = sym_eig(m);
    const Matrix rec = e.vectors * Matrix::diagonal(e.values) * e.vectors.transpose();
    const double scale = std::max(1.0, m.frobenius());
    EXPECT_LT(max_diff(rec, m), 1e-9 * scale);
    EXPECT_LT(max_diff(e.vectors.transpose() * e.vectors, Matrix::identity(n)), 1e-12);
    for (std::size_t k = 0; k < n; ++k) {
      const Matrix v = e.vectors.block(0, k, n, 1);
      EXPECT_LT((m * v - e.values[k] * v).max_abs(), 1e-10 * scale);
    }
    EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
  }
}

TEST(SymEig, RejectsNonSymmetricInput) { EXPECT_THROW(sym_eig(Matrix{{1, 2}, {0, 1}}), ContractError); }

TEST(Eigenvalues, GeneralMatrixSpectrum) {
  const auto ev = eigenvalues(Matrix{{0, 0.5}, {-0.5, 0}});
  ASSERT_EQ(ev.size(), 2u);
  for (const auto& z : ev) {
    EXPECT_NEAR(z.real(), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(z.imag()), 0.5, 1e-14);
  }
  // Upper triangular: eigenvalues on the diagonal.
  const auto tri = eigenvalues(Matrix{{-1, 4, 2}, {0, -3, 7}, {0, 0, 2}});
  EXPECT_NEAR(spectral_abscissa(Matrix{{-1, 4, 2}, {0, -3, 7}, {0, 0, 2}}), 2.0, 1e-12);
  EXPECT_EQ(tri.size(), 3u);
}

TEST(Eigenvalues, SymmetricCaseAgreesWithJacobi) {
  std::mt19937_64 rng(11);
  const Matrix m = oracle::random_symmetric(7, rng);
  auto ev = eigenvalues(m);
  std::vector<double> re;
  for (const auto& z : ev) {
    EXPECT_NEAR(z.imag(), 0.0, 1e-9);
    re.push_back(z.real());
  }
  std::sort(re.begin(), re.end());
  const auto ref = sym_eig(m).values;
  for (std::size_t i = 0; i < re.size(); ++i) EXPECT_NEAR(re[i], ref[i], 1e-9);
}

TEST(Expm2, ZeroGeneratorGivesIdentity) { EXPECT_EQ(expm2(Matrix(2, 2), 1.0), Matrix::identity(2)); }

TEST(Expm2, CompanionMatchesTaylorSeries) {
  const Matrix sc = companion(0.25);
  EXPECT_LT(max_diff(expm2(sc, 0.2), oracle::taylor_expm(sc, 0.2, 20)), 1e-12);
  const double w = 0.5, t = 0.2;
  const Matrix closed{{std::cos(w * t), std::sin(w * t) / w}, {-w * std::sin(w * t), std::cos(w * t)}};
  EXPECT_LT(max_diff(expm2(sc, t), closed), 1e-15);
}

TEST(Expm2, DegenerateCompanionLimit) {
  EXPECT_LT(max_diff(expm2(companion(0.0), 0.7), Matrix{{1, 0.7}, {0, 1}}), 1e-15);
  EXPECT_LT(max_diff(expm2(companion(1e-20), 0.7), Matrix{{1, 0.7}, {0, 1}}), 1e-12);
}

TEST(Expm2, RotationFullPeriodIsIdentity) {
  EXPECT_LT(max_diff(expm2(rotation_generator(0.5), 2.0 * std::numbers::pi / 0.5), Matrix::identity(2)), 1e-10);
}

TEST(Expm2, GroupPropertyAndHyperbolicCase) {
  for (const Matrix& m : {companion(0.25), rotation_generator(2.0), Matrix{{0.3, 1.2}, {0.4, -0.3}},
                          Matrix{{1.0, 2.0}, {-0.5, 0.2}}}) {
    EXPECT_LT(max_diff(expm2(m, 0.3) * expm2(m, 0.45), expm2(m, 0.75)), 1e-10);
    EXPECT_LT(max_diff(expm2(m, 0.5), oracle::taylor_expm(m, 0.5, 30)), 1e-12);
  }
}

TEST(Expm, GeneralMatchesTaylorSeries) {
  std::mt19937_64 rng(5);
  const Matrix m = oracle::random_matrix(4, 4, rng);
  EXPECT_LT(max_diff(expm(m, 0.8), oracle::taylor_expm(m, 0.8, 40)), 1e-12);
  EXPECT_LT(max_diff(expm(m, 3.0) , expm(m, 1.5) * expm(m, 1.5)), 1e-9 * expm(m, 3.0).max_abs());
}

TEST(Lyapunov, ScaledIdentity) {
  const Matrix q = lyap_solve(-1.0 * Matrix::identity(2), 2.0 * Matrix::identity(2));
  EXPECT_LT(max_diff(q, Matrix::identity(2)), 1e-14);
}

TEST(Lyapunov, DiagonalEntrywise) {
  const double f[] = {-1.0, -3.0};
  const Matrix q = lyap_solve(Matrix::diagonal(f), Matrix::identity(2));
  EXPECT_NEAR(q(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(q(1, 1), 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(q(0, 1), 0.0, 1e-14);
}

TEST(Lyapunov, RandomHurwitzGivesDefiniteSolution) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix f = oracle::random_matrix(3, 3, rng);
    f -= (spectral_abscissa(f) + 0.5) * Matrix::identity(3);
    Matrix w = oracle::random_symmetric(3, rng);
    w = w * w.transpose() + Matrix::identity(3);
    const Matrix q = lyap_solve(f, w);
    EXPECT_LT((f.transpose() * q + q * f + w).max_abs(), 1e-9 * w.max_abs());
    EXPECT_GT(sym_eig(q).values.front(), 0.0);
    EXPECT_LT(max_diff(q, q.transpose()), 1e-12);
  }
}

TEST(Lyapunov, ResonantSpectrumIsRejected) {
  const double f[] = {1.0, -1.0};
  EXPECT_THROW(lyap_solve(Matrix::diagonal(f), Matrix::identity(2)), SingularError);
}

TEST(Quadrature, ConstantAndPeriodic) {
  const UniformGrid g(200);
  EXPECT_NEAR(quad(sample(g, [](double) { return 1.0; })), 1.0, 1e-14);
  EXPECT_NEAR(quad(sample(g, [](double x) { return std::cos(2 * std::numbers::pi * x); })), 0.0, 1e-8);
  EXPECT_NEAR(quad(sample(g, [](double x) { return x * x; })), 1.0 / 3.0, 1e-8);
}

TEST(Quadrature, SimpsonIsExactOnCubics) {
  for (std::size_t m : {2u, 4u, 10u, 100u}) {
    const UniformGrid g(m);
    const double v = quad(sample(g, [](double x) { return 4 * x * x * x - 3 * x * x + 2 * x - 7; }));
    EXPECT_NEAR(v, 1.0 - 1.0 + 1.0 - 7.0, 1e-13) << m;
  }
}

TEST(Quadrature, OddIntervalCountFallsBackToTrapezoid) {
  const UniformGrid g(3);
  const auto f = sample(g, [](double x) { return x * x; });
  EXPECT_NEAR(quad(f), trapezoid(f), 1e-15);
}

TEST(Quadrature, RowValuedAndNorms) {
  const UniformGrid g(100);
  const auto f = sample(g, [](double x) { return Row2{x, 1.0}; });
  const Row2 q = quad(f);
  EXPECT_NEAR(q[0], 0.5, 1e-14);
  EXPECT_NEAR(q[1], 1.0, 1e-14);
  EXPECT_NEAR(l2_norm(sample(g, [](double) { return 3.0; })), 3.0, 1e-13);
  EXPECT_DOUBLE_EQ(sup_norm(sample(g, [](double x) { return -2.0 * x; })), 2.0);
}

TEST(PsdProject, ClipsNegativeEigenvalues) {
  const double d[] = {-1.0, 2.0};
  EXPECT_LT(max_diff(psd_project(Matrix::diagonal(d), 0.0), Matrix{{0, 0}, {0, 2}}), 1e-14);
}

TEST(PsdProject, DefiniteInputIsFixedPoint) {
  const Matrix m{{3, 1}, {1, 2}};
  EXPECT_LT(max_diff(psd_project(m, 0.0), m), 1e-12);
}

TEST(PsdProject, ResultRespectsFloor) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = oracle::random_symmetric(5, rng, 4.0);
    const Matrix p = psd_project(m, 0.25);
    EXPECT_GE(sym_eig(p - 0.25 * Matrix::identity(5)).values.front(), -1e-12);
  }
}
