#pragma once

#include <cmath>
#include <vector>

#include "rdreg/numkit.hpp"

namespace rdreg {

/// Uniformly sampled vector trace: samples[k] is the modal vector at t0 + k h.
struct ModalTrace {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<std::vector<double>> samples;
};

namespace detail {

inline double quadratic_form(const std::vector<double>& v, const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) s += v[i] * m(i, j) * v[j];
  return s;
}

/// Composite Simpson over values sampled at spacing h; an odd interval count
/// ends with a 3/8 panel.
inline double simpson(const std::vector<double>& f, double h) {
  const std::size_t m = f.size() - 1;
  if (m == 0) return 0.0;
  if (m == 1) return 0.5 * h * (f[0] + f[1]);
  const std::size_t even = (m % 2 == 0) ? m : m - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even; i += 2) s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  if (even != m) {
    const std::size_t i = even;
    s += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return s;
}

}  // namespace detail

struct LkSample {
  double t = 0.0;
  double v0 = 0.0;
  double vs = 0.0;
  double vr = 0.0;
  double total() const noexcept { return v0 + vs + vr; }
};

/// V1 = V0 + V_S + V_R along a trace of the reduced state and its derivative:
///   V0  = e' P1 e
///   V_S = int_{t-tau}^t e^{-2 delta (t-s)} e(s)' S e(s) ds
///   V_R = tau int_{t-tau}^t e^{-2 delta (t-s)} (s - t + tau) e'(s)' R e'(s) ds
/// Evaluated at every sample whose window [t - tau, t] lies inside the trace.
/// tau must be a multiple of the sample spacing.
inline std::vector<LkSample> eval_lk_functional(const ModalTrace& state, const ModalTrace& rate, const Matrix& P1,
                                                const Matrix& S, const Matrix& R, double delta, double tau) {
  require(state.h > 0.0 && state.h == rate.h && state.t0 == rate.t0, "eval_lk_functional: traces must share sampling");
  require(state.samples.size() == rate.samples.size(), "eval_lk_functional: trace lengths differ");
  const double ratio = tau / state.h;
  const auto lag = static_cast<std::size_t>(std::llround(ratio));
  require(std::abs(ratio - static_cast<double>(lag)) < 1e-9, "eval_lk_functional: tau must be a multiple of h");
  if (state.samples.size() <= lag) throw ContractError("eval_lk_functional: insufficient history for the delay window");

  std::vector<double> qs(state.samples.size()), qr(state.samples.size());
  for (std::size_t k = 0; k < state.samples.size(); ++k) {
    qs[k] = detail::quadratic_form(state.samples[k], S);
    qr[k] = detail::quadratic_form(rate.samples[k], R);
  }

  std::vector<LkSample> out;
  std::vector<double> fs(lag + 1), fr(lag + 1);
  for (std::size_t k = lag; k < state.samples.size(); ++k) {
    const double t = state.t0 + static_cast<double>(k) * state.h;
    for (std::size_t j = 0; j <= lag; ++j) {
      const std::size_t idx = k - lag + j;
      const double age = static_cast<double>(lag - j) * state.h;  // t - s
      const double w = std::exp(-2.0 * delta * age);
      fs[j] = w * qs[idx];
      fr[j] = w * (tau - age) * qr[idx];
    }
    LkSample s;
    s.t = t;
    s.v0 = detail::quadratic_form(state.samples[k], P1);
    s.vs = lag ? detail::simpson(fs, state.h) : 0.0;
    s.vr = lag ? tau * detail::simpson(fr, state.h) : 0.0;
    out.push_back(s);
  }
  return out;
}

/// V2 = e' Q e per sample.
inline std::vector<double> eval_v2(const ModalTrace& err, const Matrix& Q) {
  std::vector<double> out;
  out.reserve(err.samples.size());
  for (const auto& e : err.samples) out.push_back(detail::quadratic_form(e, Q));
  return out;
}

}  // namespace rdreg
