#include <gtest/gtest.h>

#include <complex>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "rdreg/regeq.hpp"

using namespace rdreg;
using cd = std::complex<double>;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

double sup_diff(const RowGrid& a, const RowGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max({m, std::abs(a[i][0] - b[i][0]), std::abs(a[i][1] - b[i][1])});
  return m;
}

// A reference observer gain for a = 1.5.
const std::vector<double> kReferenceL{-5.4933, 7.7253};

}  // namespace

TEST(InjectionProfile, SingleModes) {
  const ModalBasis b = build_basis(1, 100);
  const std::vector<double> l0{1.0, 0.0}, l1{0.0, 1.0};
  const ScalarGrid p0 = build_injection_profile(l0, b);
  for (double v : p0.values) EXPECT_DOUBLE_EQ(v, 1.0);
  const ScalarGrid p1 = build_injection_profile(l1, b);
  for (std::size_t i = 0; i < p1.size(); ++i)
    EXPECT_NEAR(p1[i], kSqrt2 * std::cos(std::numbers::pi * b.grid.node(i)), 1e-15);
}

TEST(InjectionProfile, ReferenceGainValueAtZero) {
  const ModalBasis b = build_basis(1, 100);
  const ScalarGrid p = build_injection_profile(kReferenceL, b);
  EXPECT_NEAR(p[0], -5.4933 + 7.7253 * kSqrt2, 1e-12);
  EXPECT_NEAR(p[0], 5.431, 1e-3);
  const InjectionProfile exact{kReferenceL};
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(exact(b.grid.node(i)), p[i], 1e-13);
}

TEST(InjectionProfile, RequiresOneGainPerMode) {
  const ModalBasis b = build_basis(2, 100, 1);
  const std::vector<double> three{1, 2, 3};
  EXPECT_THROW(build_injection_profile(three, b), ContractError);
}

TEST(SolveGamma, ZeroDataGivesZero) {
  PlantSpec p;
  p.a = 1.5;
  const ExoSpec exo = ExoSpec::harmonic(0.5, {1, 0}, {0, 0});
  const GammaSolution s = solve_gamma(p, exo, 100);
  EXPECT_EQ(sup_norm(s.gamma), 0.0);
}

TEST(SolveGamma, ConstantForcingIntegratesTwice) {
  PlantSpec p;
  p.a = 0.0;
  p.d1 = [](double) { return Row2{1.0, 0.0}; };
  const ExoSpec exo{Matrix(2, 2), {1, 0}, {0, 0}, 1.0};  // G = 0 test harness
  const GammaSolution s = solve_gamma(p, exo, 100);
  for (std::size_t i = 0; i < s.gamma.size(); ++i) {
    const double x = s.gamma.grid.node(i);
    EXPECT_NEAR(s.gamma[i][0], -0.5 * x * x, 1e-13);
    EXPECT_NEAR(s.gamma[i][1], 0.0, 1e-15);
  }
  EXPECT_NEAR(s.slope_at_one[0], -1.0, 1e-13);
}

TEST(SolveGamma, DemoDataGridRefinementAndResidual) {
  const PlantSpec p = oracle::demo_plant(1.5);
  const ExoSpec exo = oracle::demo_exo();
  const GammaSolution coarse = solve_gamma(p, exo, 100);
  const GammaSolution fine = solve_gamma(p, exo, 200);
  double gap = 0.0;
  for (std::size_t i = 0; i < coarse.gamma.size(); ++i) {
    gap = std::max({gap, std::abs(coarse.gamma[i][0] - fine.gamma[2 * i][0]),
                    std::abs(coarse.gamma[i][1] - fine.gamma[2 * i][1])});
  }
  EXPECT_LE(gap, 1e-6);
  EXPECT_LE(gamma_residual(fine, p, exo), 1e-6);
  EXPECT_LE(gamma_residual(coarse, p, exo), 1e-6);
  EXPECT_EQ(coarse.gamma[0], exo.d4);
  EXPECT_EQ(coarse.slope[0], p.d2);
}

TEST(Gamma1, NoDelayAndCancellation) {
  const Matrix g = oracle::demo_exo().G;
  const Row2 r = gamma1({0.3, -1.1}, {0.1, 0.2}, g, 0.0);
  EXPECT_NEAR(r[0], 0.2, 1e-15);
  EXPECT_NEAR(r[1], -1.3, 1e-15);
  const Row2 z = gamma1({0.3, -1.1}, {0.3, -1.1}, g, 0.2);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
}

TEST(Gamma1, DelayRotatesByOmegaTau) {
  const ExoSpec exo = oracle::demo_exo();
  const Row2 v{0.8, -0.6};
  const Row2 r = gamma1(v, {0, 0}, exo.G, 0.2);
  const double c = std::cos(0.1), s = std::sin(0.1);
  EXPECT_NEAR(r[0], v[0] * c + v[1] * s, 1e-15);
  EXPECT_NEAR(r[1], -v[0] * s + v[1] * c, 1e-15);
  EXPECT_NEAR(std::hypot(r[0], r[1]), 1.0, 1e-15);
}

TEST(SolveG, NoInjectionMatchesHyperbolicClosedForm) {
  for (double a : {1.5, 0.5, -2.0}) {
    const double w = 0.5, tau = 0.2;
    const GSolution s = solve_g(a, w, tau, InjectionProfile{{0.0, 0.0}}, 100);
    const cd mu = std::sqrt(cd(-a, w));
    const cd target = -std::exp(cd(0.0, -w * tau));
    const cd coeff = target / (mu * std::sinh(mu));
    for (std::size_t i = 0; i < s.g.size(); ++i) {
      const cd v = coeff * std::cosh(mu * s.g.grid.node(i));
      EXPECT_NEAR(s.g[i][0], v.real(), 1e-8);
      EXPECT_NEAR(s.g[i][1], v.imag(), 1e-8);
    }
  }
}

TEST(SolveG, NoDelayBoundaryIdentity) {
  const GSolution s = solve_g(1.5, 0.5, 0.0, InjectionProfile{kReferenceL}, 100);
  EXPECT_NEAR(s.slope_at_one[0] + 1.0, 0.0, 1e-10);
  EXPECT_NEAR(s.slope_at_one[1], 0.0, 1e-10);
}

TEST(SolveG, DemoResidualsAndObservability) {
  for (double a : {1.5, 0.5}) {
    const InjectionProfile prof{kReferenceL};
    const GSolution s = solve_g(a, 0.5, 0.2, prof, 100);
    EXPECT_LE(g_residual(s, a, 0.5, prof), 1e-6);
    EXPECT_LE(g_boundary_residual(s, 0.5, 0.2), 1e-8);
    EXPECT_TRUE(check_observable(0.5, s.g0));
  }
}

TEST(SolveG, ObservableAcrossFrequencies) {
  for (double w : {0.1, 0.5, 1.0, 5.0}) {
    const InjectionProfile prof{{-3.5, 0.0}};
    const GSolution s = solve_g(1.5, w, 0.2, prof, 100);
    EXPECT_TRUE(check_observable(w, s.g0)) << w;
    EXPECT_LE(g_residual(s, 1.5, w, prof), 1e-6);
    EXPECT_LE(g_boundary_residual(s, w, 0.2), 1e-8);
  }
}

TEST(SolveG, ResonantProfileIsReported) {
  // u'(1) is affine in the injection gains; find the real gains that zero it.
  const double a = 1.5, w = 0.5;
  auto slope = [&](double l0, double l1) { return solve_g(a, w, 0.2, InjectionProfile{{l0, l1}}, 100).shooting_slope; };
  const cd s00 = slope(0, 0), s10 = slope(1, 0) - s00, s01 = slope(0, 1) - s00;
  // Solve s00 + l0 s10 + l1 s01 = 0 for real (l0, l1).
  const double det = s10.real() * s01.imag() - s01.real() * s10.imag();
  ASSERT_GT(std::abs(det), 1e-12);
  const double l0 = (-s00.real() * s01.imag() + s01.real() * s00.imag()) / det;
  const double l1 = (-s10.real() * s00.imag() + s00.real() * s10.imag()) / det;
  EXPECT_THROW(solve_g(a, w, 0.2, InjectionProfile{{l0, l1}}, 100), ResonanceError);
  EXPECT_NO_THROW(solve_g(a, w, 0.2, InjectionProfile{{l0 + 0.5, l1}}, 100));
}

TEST(SolveG, RejectsNonPositiveFrequency) {
  EXPECT_THROW(solve_g(1.5, 0.0, 0.2, InjectionProfile{{1.0}}, 100), ContractError);
}

TEST(SolveF, FreeCaseIntegratesByHand) {
  // f1'' = 0 and f2'' = f1 with f(0) = [1, 0], f'(0) = 0 give f = [1, x^2 / 2].
  const FSolution s = solve_f(0.0, 0.0, InjectionProfile{{0.0}}, 100);
  for (std::size_t i = 0; i < s.f.size(); ++i) {
    EXPECT_NEAR(s.f[i][0], 1.0, 1e-14);
    EXPECT_NEAR(s.f[i][1], 0.5 * s.f.grid.node(i) * s.f.grid.node(i), 1e-14);
  }
}

TEST(SolveF, InitialConditionsAreExact) {
  for (double theta : {0.0, 0.25, 3.0}) {
    const FSolution s = solve_f(theta, 1.5, InjectionProfile{kReferenceL}, 100);
    EXPECT_EQ(s.f[0], (Row2{1.0, 0.0}));
    EXPECT_EQ(s.slope[0], (Row2{0.0, 0.0}));
    EXPECT_LE(f_residual(s, 1.5, InjectionProfile{kReferenceL}), 1e-6);
  }
  EXPECT_THROW(solve_f(-0.1, 1.5, InjectionProfile{kReferenceL}, 100), ContractError);
}

TEST(SolveF, EqualsGTimesInverseTransformAtTrueTheta) {
  for (double a : {1.5, 0.5}) {
    for (const auto& L : {kReferenceL, std::vector<double>{-3.5, 0.0}}) {
      const double w = 0.5;
      const InjectionProfile prof{L};
      const GSolution g = solve_g(a, w, 0.2, prof, 100);
      const Matrix tinv = inverse(canonical_transform(w, g.g0));
      const FSolution f = solve_f(w * w, a, prof, 100);
      RowGrid gt(g.g.grid);
      for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = mul(g.g[i], tinv);
      EXPECT_LE(sup_diff(f.f, gt), 1e-6);
      const Row2 edge = mul(g.slope_at_one, tinv);
      EXPECT_NEAR(edge[0], f.slope_at_one[0], 1e-6);
      EXPECT_NEAR(edge[1], f.slope_at_one[1], 1e-6);
    }
  }
}

TEST(SolveF, LipschitzInTheta) {
  const InjectionProfile prof{kReferenceL};
  const FSolution base = solve_f(0.25, 1.5, prof, 100);
  const double c = sup_diff(solve_f(0.25 + 1e-3, 1.5, prof, 100).f, base.f) / 1e-3;
  for (double h : {1e-4, 1e-5, 1e-6}) EXPECT_LE(sup_diff(solve_f(0.25 + h, 1.5, prof, 100).f, base.f), 1.1 * c * h);
}

TEST(RegulatorMaps, BuildsConsistentSnapshot) {
  const PlantSpec p = oracle::demo_plant(1.5);
  const ExoSpec exo = oracle::demo_exo();
  const ModalBasis b = build_basis(1, 100);
  const RegulatorMaps m = build_regulator_maps(p, exo, kReferenceL, b);
  ASSERT_TRUE(m.harmonic.T.has_value());
  EXPECT_NEAR(m.harmonic.theta, 0.25, 1e-15);
  EXPECT_LE((*m.harmonic.T - canonical_transform(0.5, m.g.g0)).max_abs(), 0.0);
  // gamma_1 p(t) equals gamma_c eta(t).
  for (double t = 0; t < 10; t += 0.9) EXPECT_NEAR(dot(m.gamma1, exo.state(t)), m.harmonic.eta(t)[0], 1e-12);
}

TEST(ProfileCsv, HeaderAndExactRoundTrip) {
  const FSolution s = solve_f(0.25, 1.5, InjectionProfile{kReferenceL}, 20);
  std::ostringstream os;
  write_profile_csv(os, s.f);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,component1,component2");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    double x, c1, c2;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &c1, &c2), 3);
    EXPECT_EQ(x, s.f.grid.node(rows));
    EXPECT_EQ(c1, s.f[rows][0]);
    EXPECT_EQ(c2, s.f[rows][1]);
    ++rows;
  }
  EXPECT_EQ(rows, 21u);
}
