#pragma once
// Full-information loop run twice: once on the physical plant, once on the
// transformed error system with its piecewise boundary flux. The two must
// agree through eps = w - Gamma p.

#include <vector>

#include "rdreg/modal.hpp"
#include "rdreg/plantsim.hpp"
#include "rdreg/regeq.hpp"
#include "rdreg/regulator.hpp"

namespace oracle {

struct EquivalenceRun {
  std::vector<double> t;
  std::vector<double> gap;       // sup |eps_direct - (w - Gamma p)|
  std::vector<double> eps_norm;  // L2 norm of eps_direct
  std::vector<double> y_e;       // plant tracking error w(0) - d4 p
  double gamma_scale = 0.0;      // sup |Gamma|
};

inline EquivalenceRun run_equivalence(const rdreg::PlantSpec& plant, const rdreg::ExoSpec& exo,
                                      const std::vector<double>& K, double horizon) {
  using namespace rdreg;
  const int order = static_cast<int>(K.size()) - 1;
  const ModalBasis basis = build_basis(order, plant.grid_m);
  const GammaSolution gam = solve_gamma(plant, exo, plant.grid_m);
  const Row2 g1 = gamma1(gam.slope_at_one, plant.d3, exo.G, plant.tau);

  const auto transformed = [&](const PdeState& s) {
    ScalarGrid e(s.w.grid);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = s.w[i] - dot(gam.gamma[i], s.p);
    return e;
  };

  PlantSimulator sim(plant, exo);
  PdeState s = initial_state(plant, exo);
  ScalarGrid eps = transformed(s);
  EpsilonOracle eo(plant.grid(), plant.a, plant.dt);
  DelayLine u_line(plant.tau, plant.dt), ke_line(plant.tau, plant.dt);

  EquivalenceRun out;
  out.gamma_scale = sup_norm(gam.gamma);
  const auto record = [&] {
    const ScalarGrid ref = transformed(s);
    double gap = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) gap = std::max(gap, std::abs(eps[i] - ref[i]));
    out.t.push_back(s.t);
    out.gap.push_back(gap);
    out.eps_norm.push_back(l2_norm(eps));
    out.y_e.push_back(s.output() - exo.reference(s.t));
  };

  const auto steps = static_cast<long>(std::llround(horizon / plant.dt));
  // Flux at x = 1 for the transformed system given the time and K eps_bar history.
  const auto flux = [&](double t) {
    if (t < plant.tau - 1e-12) return -dot(g1, exo.state(t - plant.tau));
    return ke_line.sample(t);
  };
  for (long n = 0; n < steps; ++n) {
    record();
    const double t = s.t;
    const auto eb_plant = project_leading(transformed(s), basis);
    const auto eb_direct = project_leading(eps, basis);
    double ke = 0.0;
    for (std::size_t k = 0; k < K.size(); ++k) ke += K[k] * eb_direct[k];
    u_line.push(t, feedforward_law(eb_plant, K, g1, s.p));
    ke_line.push(t, ke);
    const double t1 = t + plant.dt;
    const double f0 = flux(t), f1 = flux(t1);
    sim.step(s, u_line.sample(t), u_line.sample(t1));
    eo.step(eps, f0, f1);
  }
  record();
  return out;
}

}  // namespace oracle
