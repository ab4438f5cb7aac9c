#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "rdreg/exo.hpp"
#include "rdreg/modal.hpp"
#include "rdreg/numkit.hpp"
#include "rdreg/plant_spec.hpp"
#include "rdreg/plantsim.hpp"
#include "rdreg/regeq.hpp"
#include "rdreg/synthesis/certificate.hpp"

namespace rdreg {

/// PDE observer eps^_t = eps^_xx + a eps^ + L(x)(eps^(0, t) - y_e(t)) with
/// eps^_x(0) = 0 and eps^_x(1) = U(t - tau). The injection uses the
/// innovation at the start of the step.
class StateObserver {
 public:
  StateObserver(UniformGrid grid, double a, double dt, ScalarGrid injection, ScalarGrid initial)
      : stepper_(grid, a, dt), injection_(std::move(injection)), state_(std::move(initial)), source_(grid.size()) {
    require(injection_.grid == grid && state_.grid == grid, "StateObserver: grid mismatch");
  }

  const ScalarGrid& state() const noexcept { return state_; }
  double at_zero() const { return state_.front(); }

  void step(double y_e, double u_now, double u_next) {
    const double innovation = state_.front() - y_e;
    for (std::size_t i = 0; i < source_.size(); ++i) source_[i] = injection_[i] * innovation;
    stepper_.step(state_.values, 0.0, 0.0, u_now, u_next, &source_);
  }

 private:
  HeatStepper stepper_;
  ScalarGrid injection_;
  ScalarGrid state_;
  std::vector<double> source_;
};

struct AdaptiveGains {
  double iota = 0.5;
  double kappa0 = 5.0;
  double kappa1 = 10.0;

  void validate() const {
    if (!(iota > 0.0)) throw ContractError("AdaptiveGains: iota must be positive");
    if (!(kappa0 > 1.0 / (4.0 * iota))) throw ContractError("AdaptiveGains: kappa0 must exceed 1/(4 iota)");
    if (!(kappa1 > 0.0)) throw ContractError("AdaptiveGains: kappa1 must be positive");
  }
};

/// Frequency/amplitude estimator driven by the innovation y_d:
///   xi'    = -iota xi - y_d
///   chi1'  = phi + iota y_d + theta xi + kappa0 (y_d - chi1)
///   phi'   = -iota phi - iota^2 y_d
///   theta' = kappa1 xi (y_d - chi1)
/// Outputs d1 = chi1, d2 = phi + xi theta + iota chi1.
struct AdaptiveState {
  double xi = 0.0;
  double chi1 = 0.0;
  double phi = 0.0;
  double theta = 0.0;
};

class AdaptiveObserver {
 public:
  using State = AdaptiveState;

  explicit AdaptiveObserver(AdaptiveGains gains, State initial = {}) : gains_(gains), s_(initial) { gains.validate(); }

  const State& state() const noexcept { return s_; }
  const AdaptiveGains& gains() const noexcept { return gains_; }
  double theta_hat() const noexcept { return s_.theta; }
  Vec2 d_hat() const noexcept { return {s_.chi1, s_.phi + s_.xi * s_.theta + gains_.iota * s_.chi1}; }

  /// One RK4 step with y_d held over the step.
  void step(double y_d, double dt) {
    auto rhs = [&](const State& x) {
      const double io = gains_.iota;
      return State{-io * x.xi - y_d, x.phi + io * y_d + x.theta * x.xi + gains_.kappa0 * (y_d - x.chi1),
                   -io * x.phi - io * io * y_d, gains_.kappa1 * x.xi * (y_d - x.chi1)};
    };
    auto axpy = [](const State& x, double h, const State& k) {
      return State{x.xi + h * k.xi, x.chi1 + h * k.chi1, x.phi + h * k.phi, x.theta + h * k.theta};
    };
    const State k1 = rhs(s_);
    const State k2 = rhs(axpy(s_, 0.5 * dt, k1));
    const State k3 = rhs(axpy(s_, 0.5 * dt, k2));
    const State k4 = rhs(axpy(s_, dt, k3));
    s_.xi += dt / 6.0 * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi);
    s_.chi1 += dt / 6.0 * (k1.chi1 + 2.0 * k2.chi1 + 2.0 * k3.chi1 + k4.chi1);
    s_.phi += dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    s_.theta += dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
  }

 private:
  AdaptiveGains gains_;
  State s_;
};

struct ControllerConfig {
  std::vector<double> K;  // modal gains k_0..k_N
  double tau = 0.0;
  double refresh_threshold = 1e-3;  // |theta^ - theta_snapshot| that triggers a new f
  int refresh_min_steps = 10;       // at least this many calls between refreshes
  double theta_floor = 0.0;
};

/// U = sum k_n <eps^, phi_n> + sum k_n <f(., theta^), phi_n> d^ - f'(1, theta^) e^{S_c(theta^) tau} d^.
class ControlLaw {
 public:
  ControlLaw(ControllerConfig cfg, const ModalBasis& basis, InjectionProfile profile, double a,
             double initial_theta = 0.0)
      : cfg_(std::move(cfg)), profile_(std::move(profile)), a_(a), grid_m_(basis.grid.intervals()) {
    if (static_cast<int>(cfg_.K.size()) != basis.order + 1) throw ContractError("ControlLaw: K must have N+1 entries");
    const auto w = quadrature_weights(basis.grid);
    for (int n = 0; n <= basis.order; ++n) {
      std::vector<double> row(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) row[i] = w[i] * basis.modes[static_cast<std::size_t>(n)][i];
      weighted_modes_.push_back(std::move(row));
    }
    refresh(std::max(initial_theta, cfg_.theta_floor));
  }

  /// Modal feedback sum k_n <v, phi_n>.
  double modal_feedback(const ScalarGrid& v) const {
    double u = 0.0;
    for (std::size_t n = 0; n < cfg_.K.size(); ++n) {
      double c = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) c += weighted_modes_[n][i] * v[i];
      u += cfg_.K[n] * c;
    }
    return u;
  }

  double operator()(const ScalarGrid& eps_hat, double theta_hat, Vec2 d_hat) {
    double theta = theta_hat;
    if (theta < cfg_.theta_floor) {
      theta = cfg_.theta_floor;
      ++clamp_events_;
    }
    ++calls_since_refresh_;
    if (std::abs(theta - f_->theta) > cfg_.refresh_threshold && calls_since_refresh_ >= cfg_.refresh_min_steps)
      refresh(theta);
    const double feedback = modal_feedback(eps_hat);
    const double internal = dot(kf_, d_hat);
    const Row2 edge = mul(f_->slope_at_one, expm2(companion(theta), cfg_.tau));
    return feedback + internal - dot(edge, d_hat);
  }

  std::shared_ptr<const FSolution> snapshot() const noexcept { return f_; }
  long clamp_events() const noexcept { return clamp_events_; }
  long refreshes() const noexcept { return refreshes_; }

 private:
  void refresh(double theta) {
    f_ = std::make_shared<const FSolution>(solve_f(theta, a_, profile_, grid_m_));
    kf_ = {0.0, 0.0};
    for (std::size_t n = 0; n < cfg_.K.size(); ++n) {
      Row2 c{0.0, 0.0};
      for (std::size_t i = 0; i < f_->f.size(); ++i) c = c + weighted_modes_[n][i] * f_->f[i];
      kf_ = kf_ + cfg_.K[n] * c;
    }
    calls_since_refresh_ = 0;
    ++refreshes_;
  }

  ControllerConfig cfg_;
  InjectionProfile profile_;
  double a_;
  std::size_t grid_m_;
  std::vector<std::vector<double>> weighted_modes_;
  std::shared_ptr<const FSolution> f_;
  Row2 kf_{0.0, 0.0};  // sum k_n <f, phi_n>
  int calls_since_refresh_ = 0;
  long clamp_events_ = 0;
  long refreshes_ = -1;  // the initial solve is not a refresh
};

/// Full-information law U = K eps_bar + gamma_1 p.
inline double feedforward_law(std::span<const double> eps_bar, std::span<const double> K, Row2 gamma1, Vec2 p) {
  require(eps_bar.size() == K.size(), "feedforward_law: size mismatch");
  double u = dot(gamma1, p);
  for (std::size_t n = 0; n < K.size(); ++n) u += K[n] * eps_bar[n];
  return u;
}

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

struct TraceRow {
  double t = 0.0;
  double y_p = 0.0;
  double y_ref = 0.0;
  double y_e = 0.0;
  double theta_hat = 0.0;
  double U = 0.0;
  double dcan1_hat = 0.0;
  double dcan2_hat = 0.0;
  double norm_eps_hat = 0.0;
};

struct ClosedLoopTrace {
  std::vector<TraceRow> rows;
  std::vector<double> snapshot_times;
  std::vector<std::vector<double>> snapshots;
  UniformGrid grid{2};
  double max_abs_w = 0.0;
  long clamp_events = 0;
  long refreshes = 0;
};

/// Everything visible at one step, for diagnostics and test oracles.
struct StepView {
  std::size_t step = 0;
  double t = 0.0;
  const PdeState& plant;
  const ScalarGrid& eps_hat;
  const AdaptiveObserver& adaptive;
  double y_e = 0.0;
  double y_d = 0.0;
  double U = 0.0;
};

struct ClosedLoopOptions {
  double horizon = 60.0;
  double snapshot_interval = 0.5;  // <= 0 disables snapshots
  std::function<void(const StepView&)> probe;
};

/// Per step n: measure y_e(t_n), form y_d, evaluate U(t_n) from the current
/// estimates, push U into the delay line, then advance the adaptive
/// observer, the state observer and the plant to t_{n+1}.
inline ClosedLoopTrace run_closed_loop(const PlantSpec& plant, const ExoSpec& exo, const GainCertificate& gains,
                                       const AdaptiveGains& adaptive_gains, const ClosedLoopOptions& opt,
                                       const ScalarGrid* eps_hat0 = nullptr) {
  plant.validate();
  exo.validate();
  adaptive_gains.validate();
  if (!(opt.horizon > 0.0)) throw ContractError("run_closed_loop: horizon must be positive");
  const double steps_real = opt.horizon / plant.dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-6 * std::max(1.0, steps_real))
    throw ContractError("run_closed_loop: horizon must be a multiple of dt");
  if (std::abs(gains.a - plant.a) > 1e-12 || std::abs(gains.tau - plant.tau) > 1e-12)
    throw ContractError("run_closed_loop: certificate was built for a different plant");

  const UniformGrid grid = plant.grid();
  const ModalBasis basis = build_basis(gains.order, grid.intervals(), gains.order);
  const std::vector<double> L(gains.L.data().begin(), gains.L.data().end());
  const InjectionProfile profile{L};

  PlantSimulator sim(plant, exo);
  PdeState state = initial_state(plant, exo);
  StateObserver observer(grid, plant.a, plant.dt, build_injection_profile(L, basis),
                         eps_hat0 ? *eps_hat0 : sample(grid, plant.w0));
  AdaptiveObserver adaptive(adaptive_gains);
  ControllerConfig cc;
  cc.K.assign(gains.K.data().begin(), gains.K.data().end());
  cc.tau = plant.tau;
  ControlLaw law(cc, basis, profile, plant.a, adaptive.theta_hat());
  DelayLine delay(plant.tau, plant.dt);

  ClosedLoopTrace trace;
  trace.grid = grid;
  trace.rows.reserve(steps + 1);
  const std::size_t snap_every =
      opt.snapshot_interval > 0.0 ? std::max<std::size_t>(1, std::llround(opt.snapshot_interval / plant.dt)) : 0;
  const auto weights = quadrature_weights(grid);

  for (std::size_t n = 0;; ++n) {
    const double t = static_cast<double>(n) * plant.dt;
    state.t = t;
    const double y_p = state.output();
    const double y_ref = exo.reference(t);
    const double y_e = y_p - y_ref;
    const double y_d = y_e - observer.at_zero();
    const Vec2 d_hat = adaptive.d_hat();
    const double u = law(observer.state(), adaptive.theta_hat(), d_hat);

    double e2 = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) e2 += weights[i] * observer.state()[i] * observer.state()[i];
    trace.rows.push_back({t, y_p, y_ref, y_e, adaptive.theta_hat(), u, d_hat[0], d_hat[1], std::sqrt(e2)});
    for (double v : state.w.values) trace.max_abs_w = std::max(trace.max_abs_w, std::abs(v));
    if (!std::isfinite(u) || !std::isfinite(y_e)) throw Error("run_closed_loop: non-finite signal at t = " + std::to_string(t));
    if (snap_every && n % snap_every == 0) {
      trace.snapshot_times.push_back(t);
      trace.snapshots.push_back(state.w.values);
    }
    if (opt.probe) opt.probe(StepView{n, t, state, observer.state(), adaptive, y_e, y_d, u});
    if (n == steps) break;

    delay.push(t, u);
    const double t_next = static_cast<double>(n + 1) * plant.dt;
    const double u_now = delay.sample(t);
    const double u_next = delay.sample(t_next);
    adaptive.step(y_d, plant.dt);
    observer.step(y_e, u_now, u_next);
    sim.step(state, u_now, u_next);
  }
  trace.clamp_events = law.clamp_events();
  trace.refreshes = law.refreshes();
  return trace;
}

inline void write_trace_csv(std::ostream& os, const ClosedLoopTrace& trace) {
  os << "t,y_p,y_ref,y_e,theta_hat,U,dcan1_hat,dcan2_hat,norm_eps_hat\n";
  char buf[256];
  for (const TraceRow& r : trace.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.y_p, r.y_ref,
                  r.y_e, r.theta_hat, r.U, r.dcan1_hat, r.dcan2_hat, r.norm_eps_hat);
    os << buf;
  }
}

}  // namespace rdreg
