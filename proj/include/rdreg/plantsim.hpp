#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <vector>

#include "rdreg/exo.hpp"
#include "rdreg/numkit.hpp"
#include "rdreg/plant_spec.hpp"

namespace rdreg {

/// History of the control signal for the delayed boundary input.
/// U(s) = 0 for s < 0; linear interpolation between pushed samples.
class DelayLine {
 public:
  DelayLine(double tau, double dt) : tau_(tau), dt_(dt) {
    require(tau >= 0.0, "DelayLine: tau must be >= 0");
    require(dt > 0.0, "DelayLine: dt must be positive");
  }

  double tau() const noexcept { return tau_; }

  void push(double t, double u) {
    if (!samples_.empty() && !(t > samples_.back().t)) throw ContractError("DelayLine: pushes must be time-monotone");
    samples_.push_back({t, u});
    // Keep [t - tau - 2 dt, t]; older samples can never be queried again.
    while (samples_.size() > 2 && samples_[1].t < t - tau_ - 2.0 * dt_) samples_.pop_front();
  }

  /// U(t - tau).
  double sample(double t) const { return value_at(t - tau_); }

  /// push(t, u) followed by sample(t).
  double push_and_sample(double t, double u) {
    push(t, u);
    return sample(t);
  }

  double value_at(double s) const {
    const double eps = 1e-12 * std::max(1.0, std::abs(s));
    if (s < -eps) return 0.0;
    if (samples_.empty()) throw ContractError("DelayLine: query with empty history");
    if (s < samples_.front().t - eps) throw ContractError("DelayLine: query older than the buffered history");
    if (s >= samples_.back().t) return samples_.back().u;
    if (s <= samples_.front().t) return samples_.front().u;
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                                     [](double v, const Sample& x) { return v < x.t; });
    const Sample& hi = *it;
    const Sample& lo = *(it - 1);
    const double w = (s - lo.t) / (hi.t - lo.t);
    return lo.u + w * (hi.u - lo.u);
  }

 private:
  struct Sample {
    double t;
    double u;
  };
  double tau_;
  double dt_;
  std::deque<Sample> samples_;
};

/// Crank-Nicolson integrator for v_t = v_xx + a v + s(x, t) on [0, 1] with
/// flux data v_x(0) = q0, v_x(1) = q1 imposed through ghost nodes. The
/// tridiagonal factorization is computed once.
class HeatStepper {
 public:
  HeatStepper(UniformGrid grid, double a, double dt) : grid_(grid), a_(a), dt_(dt) {
    require(dt > 0.0, "HeatStepper: dt must be positive");
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    const double r = dt / (h * h);
    lower_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      diag_[i] = 1.0 + r - 0.5 * dt * a;
      if (i > 0) lower_[i] = -0.5 * r;
      if (i + 1 < n) upper_[i] = -0.5 * r;
    }
    upper_[0] = -r;
    lower_[n - 1] = -r;
    // Thomas forward sweep, stored.
    cprime_.assign(n, 0.0);
    denom_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = diag_[i] - (i ? lower_[i] * cprime_[i - 1] : 0.0);
      if (std::abs(d) < 1e-300) throw SingularError("HeatStepper: tridiagonal system is singular");
      denom_[i] = d;
      cprime_[i] = upper_[i] / d;
    }
    rhs_.assign(n, 0.0);
  }

  UniformGrid grid() const noexcept { return grid_; }
  double dt() const noexcept { return dt_; }
  double a() const noexcept { return a_; }

  /// Advance v by one step. Fluxes at t_n and t_{n+1}; `source` (may be
  /// null) is the forcing at the half step.
  void step(std::vector<double>& v, double q0_now, double q0_next, double q1_now, double q1_next,
            const std::vector<double>* source = nullptr) {
    const std::size_t n = grid_.size();
    require(v.size() == n, "HeatStepper: state size mismatch");
    const double h = grid_.spacing();
    const double r = dt_ / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
      double lap;
      if (i == 0)
        lap = 2.0 * (v[1] - v[0]);
      else if (i + 1 == n)
        lap = 2.0 * (v[n - 2] - v[n - 1]);
      else
        lap = v[i - 1] - 2.0 * v[i] + v[i + 1];
      rhs_[i] = v[i] + 0.5 * r * lap + 0.5 * dt_ * a_ * v[i];
      if (source) rhs_[i] += dt_ * (*source)[i];
    }
    rhs_[0] += -dt_ / h * (q0_now + q0_next);
    rhs_[n - 1] += dt_ / h * (q1_now + q1_next);
    // Thomas back substitution.
    rhs_[0] /= denom_[0];
    for (std::size_t i = 1; i < n; ++i) rhs_[i] = (rhs_[i] - lower_[i] * rhs_[i - 1]) / denom_[i];
    v[n - 1] = rhs_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) v[i] = rhs_[i] - cprime_[i] * v[i + 1];
  }

 private:
  UniformGrid grid_;
  double a_;
  double dt_;
  std::vector<double> lower_, diag_, upper_, cprime_, denom_, rhs_;
};

/// Plant state: time, spatial profile w(., t) and exosystem state p(t).
struct PdeState {
  double t = 0.0;
  ScalarGrid w;
  Vec2 p{0.0, 0.0};

  double output() const { return w.values.front(); }  // y_p = w(0, t)
};

inline PdeState initial_state(const PlantSpec& plant, const ExoSpec& exo) {
  return PdeState{0.0, sample(plant.grid(), plant.w0), exo.p0};
}

/// Plant w_t = w_xx + a w + d1(x) p with w_x(0) = d2 p, w_x(1) = U(t - tau) + d3 p,
/// and the exosystem advanced by its exact rotation.
class PlantSimulator {
 public:
  PlantSimulator(const PlantSpec& plant, const ExoSpec& exo)
      : plant_(plant),
        stepper_(plant.grid(), plant.a, plant.dt),
        d1_(sample(plant.grid(), plant.d1)),
        flow_(expm2(exo.G, plant.dt)),
        half_flow_(expm2(exo.G, 0.5 * plant.dt)),
        source_(plant.grid().size(), 0.0) {
    plant.validate();
    exo.validate();
  }

  /// One step with the delayed input sampled at t_n and t_{n+1}.
  void step(PdeState& s, double u_now, double u_next) {
    require(s.w.grid == stepper_.grid(), "PlantSimulator: grid mismatch");
    const Vec2 p_next = mul(flow_, s.p);
    const Vec2 p_half = mul(half_flow_, s.p);
    for (std::size_t i = 0; i < source_.size(); ++i) source_[i] = dot(d1_[i], p_half);
    stepper_.step(s.w.values, dot(plant_.d2, s.p), dot(plant_.d2, p_next), u_now + dot(plant_.d3, s.p),
                  u_next + dot(plant_.d3, p_next), &source_);
    s.p = p_next;
    s.t += plant_.dt;
  }

  void step(PdeState& s, double u_delayed) { step(s, u_delayed, u_delayed); }

  const PlantSpec& spec() const noexcept { return plant_; }

 private:
  PlantSpec plant_;
  HeatStepper stepper_;
  RowGrid d1_;
  Matrix flow_;
  Matrix half_flow_;
  std::vector<double> source_;
};

/// Single-step convenience form (input held over the step).
inline PdeState step_plant(PdeState state, const PlantSpec& plant, const ExoSpec& exo, double u_delayed) {
  PlantSimulator sim(plant, exo);
  sim.step(state, u_delayed);
  return state;
}

/// Transformed error system eps_t = eps_xx + a eps, eps_x(0) = 0, with the
/// boundary flux at x = 1 supplied by the caller (test oracle).
class EpsilonOracle {
 public:
  EpsilonOracle(UniformGrid grid, double a, double dt) : stepper_(grid, a, dt) {}

  void step(ScalarGrid& eps, double flux_now, double flux_next) {
    stepper_.step(eps.values, 0.0, 0.0, flux_now, flux_next);
  }

 private:
  HeatStepper stepper_;
};

/// Snapshot CSV: first row "t" followed by the x nodes, then one row per
/// stored time.
inline void write_snapshots_csv(std::ostream& os, UniformGrid grid, const std::vector<double>& times,
                                const std::vector<std::vector<double>>& states) {
  char buf[40];
  os << 't';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g", grid.node(i));
    os << buf;
  }
  os << '\n';
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", times[k]);
    os << buf;
    for (double v : states[k]) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace rdreg
