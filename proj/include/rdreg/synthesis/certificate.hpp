#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "rdreg/synthesis/lmi.hpp"
#include "rdreg/synthesis/reduced.hpp"

namespace rdreg {

/// Gains K, L with the matrices that certify them.
struct GainCertificate {
  double a = 0.0;
  double delta = 0.0;
  double tau = 0.0;
  int order = 0;
  Matrix K;  // 1 x (N+1)
  Matrix L;  // (N+1) x 1
  LmiVariables lmi;
  Matrix Q;
  double phi_margin = 0.0;       // lambda_max(Phi)
  double observer_margin = 0.0;  // lambda_max(Q(A+LC) + (A+LC)'Q + 2 delta Q)
  bool controller_feasible = false;
  bool observer_feasible = false;

  bool feasible() const noexcept { return controller_feasible && observer_feasible; }
  ReducedModel model() const { return build_reduced(a, delta, tau, order); }
};

struct SynthesisOptions {
  PoleTargets controller{0.5, 0.3};
  PoleTargets observer{1.0, 0.3};
  LmiOptions lmi{};
  int retries = 8;           // margin steps after the first attempt
  double margin_step = 0.5;
  std::optional<Matrix> fixed_K;  // skip design, certify as given
  std::optional<Matrix> fixed_L;
};

/// Two-stage synthesis: pole placement, then convex certification with K
/// (resp. L) fixed. Infeasible attempts step the placement margin. The
/// returned certificate reports feasibility; it never throws for an
/// infeasible LMI.
inline GainCertificate synthesize(const ReducedModel& m, const SynthesisOptions& opt = {}) {
  GainCertificate c;
  c.a = m.a;
  c.delta = m.delta;
  c.tau = m.tau;
  c.order = m.order;

  PoleTargets ct = opt.controller;
  for (int attempt = 0; attempt <= opt.retries; ++attempt) {
    c.K = opt.fixed_K ? *opt.fixed_K : design_K(m, ct);
    const ControllerCertificate cc = certify_controller(m, c.K, opt.lmi);
    c.lmi = cc.vars;
    c.phi_margin = cc.phi_margin;
    c.controller_feasible = cc.feasible;
    if (cc.feasible || opt.fixed_K) break;
    ct.margin += opt.margin_step;
  }

  PoleTargets ot = opt.observer;
  for (int attempt = 0; attempt <= opt.retries; ++attempt) {
    c.L = opt.fixed_L ? *opt.fixed_L : design_L(m, ot);
    const ObserverCertificate oc = certify_observer(m, c.L);
    c.Q = oc.feasible ? oc.Q : Matrix(m.dimension(), m.dimension());
    c.observer_margin = oc.feasible ? oc.margin : oc.abscissa + m.delta;
    c.observer_feasible = oc.feasible;
    if (oc.feasible || opt.fixed_L) break;
    ot.margin += opt.margin_step;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Independent verification
// ---------------------------------------------------------------------------

struct VerifyReport {
  double phi_margin = 0.0;
  double observer_margin = 0.0;
  double min_eig_P1 = 0.0;
  double min_eig_S = 0.0;
  double min_eig_R = 0.0;
  double min_eig_Q = 0.0;
  bool symmetric = false;  // P1, S, R, Q symmetric to 1e-12
  bool pass = false;
};

/// Recomputes every margin from the stored matrices; nothing stored in
/// the certificate's margin fields is trusted.
inline VerifyReport verify(const GainCertificate& c) {
  const ReducedModel m = c.model();
  VerifyReport r;
  const auto is_sym = [](const Matrix& x) { return x.is_square() && x.is_symmetric(1e-12); };
  r.symmetric = is_sym(c.lmi.P1) && is_sym(c.lmi.S) && is_sym(c.lmi.R) && is_sym(c.Q);
  if (!r.symmetric) return r;
  r.phi_margin = lambda_max(build_phi(m, c.K, c.lmi));
  r.observer_margin = lambda_max(observer_lmi(m, c.L, c.Q));
  r.min_eig_P1 = lambda_min(c.lmi.P1);
  r.min_eig_S = lambda_min(c.lmi.S);
  r.min_eig_R = lambda_min(c.lmi.R);
  r.min_eig_Q = lambda_min(c.Q);
  r.pass = r.phi_margin <= -1e-8 && r.observer_margin <= -1e-8 && r.min_eig_P1 > 1e-9 && r.min_eig_S > 1e-9 &&
           r.min_eig_R > 1e-9 && r.min_eig_Q > 1e-9;
  return r;
}

// ---------------------------------------------------------------------------
// Text format:
//   rdreg-certificate 1
//   scalar <name> <value>
//   matrix <name> <rows> <cols>
//   <row-major entries, one row per line>
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_matrix(std::ostream& os, const char* name, const Matrix& m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << fmt17(m(i, j));
    os << '\n';
  }
}

}  // namespace detail

inline void write_certificate(std::ostream& os, const GainCertificate& c) {
  using detail::fmt17;
  os << "rdreg-certificate 1\n";
  os << "scalar a " << fmt17(c.a) << '\n';
  os << "scalar delta " << fmt17(c.delta) << '\n';
  os << "scalar tau " << fmt17(c.tau) << '\n';
  os << "scalar order " << c.order << '\n';
  os << "scalar phi_margin " << fmt17(c.phi_margin) << '\n';
  os << "scalar observer_margin " << fmt17(c.observer_margin) << '\n';
  detail::write_matrix(os, "K", c.K);
  detail::write_matrix(os, "L", c.L);
  detail::write_matrix(os, "P1", c.lmi.P1);
  detail::write_matrix(os, "P2", c.lmi.P2);
  detail::write_matrix(os, "P3", c.lmi.P3);
  detail::write_matrix(os, "S", c.lmi.S);
  detail::write_matrix(os, "R", c.lmi.R);
  detail::write_matrix(os, "Q", c.Q);
}

inline std::string certificate_text(const GainCertificate& c) {
  std::ostringstream os;
  write_certificate(os, c);
  return os.str();
}

/// Parses the text format. Stored feasibility flags are not restored;
/// run verify() on the result.
inline GainCertificate read_certificate(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "rdreg-certificate" || version != 1)
    throw ConfigError(1, "certificate: missing 'rdreg-certificate 1' header");
  std::map<std::string, double> scalars;
  std::map<std::string, Matrix> matrices;
  std::string kind;
  while (is >> kind) {
    std::string name;
    if (!(is >> name)) throw ConfigError(0, "certificate: truncated entry");
    if (kind == "scalar") {
      double v;
      if (!(is >> v)) throw ConfigError(0, "certificate: bad scalar '" + name + "'");
      scalars[name] = v;
    } else if (kind == "matrix") {
      std::size_t r = 0, cc = 0;
      if (!(is >> r >> cc) || r == 0 || cc == 0 || r > 64 || cc > 64)
        throw ConfigError(0, "certificate: bad dimensions for '" + name + "'");
      Matrix m(r, cc);
      for (double& e : m.data())
        if (!(is >> e)) throw ConfigError(0, "certificate: truncated matrix '" + name + "'");
      matrices[name] = std::move(m);
    } else {
      throw ConfigError(0, "certificate: unknown entry kind '" + kind + "'");
    }
  }
  auto scalar = [&](const char* n) {
    auto it = scalars.find(n);
    if (it == scalars.end()) throw ConfigError(0, std::string("certificate: missing scalar ") + n);
    return it->second;
  };
  auto matrix = [&](const char* n) {
    auto it = matrices.find(n);
    if (it == matrices.end()) throw ConfigError(0, std::string("certificate: missing matrix ") + n);
    return it->second;
  };
  GainCertificate c;
  c.a = scalar("a");
  c.delta = scalar("delta");
  c.tau = scalar("tau");
  const double order = scalar("order");
  if (order < 0 || order != std::floor(order) || order > 20) throw ConfigError(0, "certificate: bad order");
  c.order = static_cast<int>(order);
  c.phi_margin = scalar("phi_margin");
  c.observer_margin = scalar("observer_margin");
  c.K = matrix("K");
  c.L = matrix("L");
  c.lmi = {matrix("P1"), matrix("P2"), matrix("P3"), matrix("S"), matrix("R")};
  c.Q = matrix("Q");
  const std::size_t n = c.model().dimension();
  for (const Matrix* x : {&c.lmi.P1, &c.lmi.P2, &c.lmi.P3, &c.lmi.S, &c.lmi.R, &c.Q})
    if (x->rows() != n || x->cols() != n) throw ConfigError(0, "certificate: matrix dimension does not match order");
  if (c.K.rows() != 1 || c.K.cols() != n || c.L.rows() != n || c.L.cols() != 1)
    throw ConfigError(0, "certificate: gain dimension does not match order");
  return c;
}

}  // namespace rdreg
