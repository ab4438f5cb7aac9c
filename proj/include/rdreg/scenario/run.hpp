#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "rdreg/regeq.hpp"
#include "rdreg/regulator.hpp"
#include "rdreg/scenario/config.hpp"
#include "rdreg/scenario/decay.hpp"
#include "rdreg/synthesis/certificate.hpp"

namespace rdreg {

struct RunMetrics {
  int order = 0;
  std::vector<double> K;
  std::vector<double> L;
  double phi_margin = 0.0;
  double observer_margin = 0.0;
  std::array<double, 2> decay_window{0.0, 0.0};
  std::optional<double> decay_rate;  // empty when |y_e| is below the floor in the window
  double early_peak = 0.0;           // max |y_e| over the early window
  double late_peak = 0.0;            // max |y_e| over the decay window
  double envelope_ratio = 0.0;
  double theta_hat_final = 0.0;
  std::optional<double> theta_error;  // |theta^ - omega^2|; empty without excitation
  double max_abs_w = 0.0;
  double initial_amplitude = 0.0;
  long clamp_events = 0;
  long f_refreshes = 0;
  double wall_clock_s = 0.0;
};

inline nlohmann::ordered_json to_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["order"] = m.order;
  j["K"] = m.K;
  j["L"] = m.L;
  j["phi_margin"] = m.phi_margin;
  j["observer_margin"] = m.observer_margin;
  j["decay_window"] = m.decay_window;
  j["decay_rate"] = m.decay_rate ? nlohmann::ordered_json(*m.decay_rate) : nlohmann::ordered_json(nullptr);
  j["early_peak_abs_y_e"] = m.early_peak;
  j["late_peak_abs_y_e"] = m.late_peak;
  j["envelope_ratio"] = m.envelope_ratio;
  j["theta_hat_final"] = m.theta_hat_final;
  j["theta_error"] = m.theta_error ? nlohmann::ordered_json(*m.theta_error) : nlohmann::ordered_json(nullptr);
  j["max_abs_w"] = m.max_abs_w;
  j["initial_amplitude"] = m.initial_amplitude;
  j["theta_clamp_events"] = m.clamp_events;
  j["f_refreshes"] = m.f_refreshes;
  j["wall_clock_s"] = m.wall_clock_s;
  return j;
}

/// Thrown when synthesis cannot certify the gains.
class InfeasibleError : public SynthesisError {
 public:
  InfeasibleError(const std::string& msg, GainCertificate cert) : SynthesisError(msg), cert_(std::move(cert)) {}
  const GainCertificate& certificate() const noexcept { return cert_; }

 private:
  GainCertificate cert_;
};

inline std::string margin_report(const GainCertificate& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "controller %s (lambda_max(Phi) = %.17g), observer %s (margin = %.17g)",
                c.controller_feasible ? "certified" : "NOT certified", c.phi_margin,
                c.observer_feasible ? "certified" : "NOT certified", c.observer_margin);
  return buf;
}

/// Design and certify; throws InfeasibleError when either part fails.
inline GainCertificate synthesize_scenario(const ScenarioConfig& cfg) {
  GainCertificate cert = synthesize(cfg.model(), cfg.synthesis());
  if (!cert.feasible()) throw InfeasibleError("certification failed: " + margin_report(cert), cert);
  return cert;
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
}

struct ScenarioResult {
  GainCertificate certificate;
  ClosedLoopTrace trace;
  RunMetrics metrics;
};

/// synth -> certify -> simulate. With a non-empty out_dir writes trace.csv,
/// snapshots.csv, metrics.json, certificate.txt and effective.cfg.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult r;
  r.certificate = synthesize_scenario(cfg);
  const GainCertificate& cert = r.certificate;

  const PlantSpec plant = cfg.plant();
  const ExoSpec exo = cfg.exo();
  ClosedLoopOptions opt;
  opt.horizon = cfg.horizon;
  opt.snapshot_interval = cfg.snapshot_interval;
  const ScalarGrid eps0 = sample(plant.grid(), [&](double x) { return cfg.eps_hat0(x); });
  r.trace = run_closed_loop(plant, exo, cert, cfg.adaptive(), opt, &eps0);

  RunMetrics& m = r.metrics;
  m.order = cert.order;
  m.K.assign(cert.K.data().begin(), cert.K.data().end());
  m.L.assign(cert.L.data().begin(), cert.L.data().end());
  m.phi_margin = cert.phi_margin;
  m.observer_margin = cert.observer_margin;
  m.decay_window = cfg.tail_window();
  std::vector<double> ts, ye;
  for (const TraceRow& row : r.trace.rows) {
    ts.push_back(row.t);
    ye.push_back(row.y_e);
  }
  try {
    m.decay_rate = estimate_decay(ts, ye, m.decay_window[0], m.decay_window[1]).rate;
  } catch (const DegenerateError&) {
    m.decay_rate.reset();
  }
  m.early_peak = peak_abs(ts, ye, cfg.early_window[0], cfg.early_window[1]);
  m.late_peak = peak_abs(ts, ye, m.decay_window[0], m.decay_window[1]);
  m.envelope_ratio = m.early_peak > 0.0 ? m.late_peak / m.early_peak : 0.0;
  m.theta_hat_final = r.trace.rows.back().theta_hat;
  // The frequency is only identifiable when the disturbance actually excites y_e.
  try {
    const GammaSolution gam = solve_gamma(plant, exo, plant.grid_m);
    harmonic_from_gamma(gamma1(gam.slope_at_one, plant.d3, exo.G, plant.tau), exo);
    m.theta_error = std::abs(m.theta_hat_final - cfg.omega * cfg.omega);
  } catch (const DegenerateError&) {
    m.theta_error.reset();
  }
  m.max_abs_w = r.trace.max_abs_w;
  const ScalarGrid w0 = sample(plant.grid(), plant.w0);
  m.initial_amplitude = sup_norm(w0);
  m.clamp_events = r.trace.clamp_events;
  m.f_refreshes = r.trace.refreshes;
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ostringstream tr, sn, cf;
    write_trace_csv(tr, r.trace);
    write_snapshots_csv(sn, r.trace.grid, r.trace.snapshot_times, r.trace.snapshots);
    write_config(cf, cfg);
    write_text_file(out_dir / "trace.csv", tr.str());
    write_text_file(out_dir / "snapshots.csv", sn.str());
    write_text_file(out_dir / "certificate.txt", certificate_text(cert));
    write_text_file(out_dir / "effective.cfg", cf.str());
    write_text_file(out_dir / "metrics.json", to_json(m).dump(2) + "\n");
  }
  return r;
}

}  // namespace rdreg
