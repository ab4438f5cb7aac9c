#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "rdreg/error.hpp"

namespace rdreg {

struct DecayFit {
  double rate = 0.0;  // -slope of log|v| against t
  std::size_t samples = 0;
  std::size_t points_used = 0;
  bool envelope = false;  // true when the fit ran on local peaks
};

/// Exponential decay rate of |v| over t in [t_begin, t_end]. When |v|
/// oscillates (at least four interior local maxima) the fit runs on those
/// peaks; otherwise on every sample. Values below 1e-14 are dropped.
inline DecayFit estimate_decay(std::span<const double> t, std::span<const double> v, double t_begin, double t_end) {
  require(t.size() == v.size(), "estimate_decay: series lengths differ");
  std::vector<double> tw, aw;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_begin && t[i] <= t_end) {
      tw.push_back(t[i]);
      aw.push_back(std::abs(v[i]));
    }
  DecayFit fit;
  fit.samples = tw.size();
  if (tw.size() < 10) throw DegenerateError("estimate_decay: fewer than 10 samples in the window");

  std::vector<double> px, py;
  for (std::size_t i = 1; i + 1 < aw.size(); ++i)
    if (aw[i] >= aw[i - 1] && aw[i] > aw[i + 1] && aw[i] >= 1e-14) {
      px.push_back(tw[i]);
      py.push_back(std::log(aw[i]));
    }
  fit.envelope = px.size() >= 4;
  if (!fit.envelope) {
    px.clear();
    py.clear();
    for (std::size_t i = 0; i < tw.size(); ++i)
      if (aw[i] >= 1e-14) {
        px.push_back(tw[i]);
        py.push_back(std::log(aw[i]));
      }
  }
  if (px.size() < 2) throw DegenerateError("estimate_decay: series is below the numerical floor");
  fit.points_used = px.size();

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    mx += px[i];
    my += py[i];
  }
  mx /= static_cast<double>(px.size());
  my /= static_cast<double>(px.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    sxx += (px[i] - mx) * (px[i] - mx);
    sxy += (px[i] - mx) * (py[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateError("estimate_decay: window has no time extent");
  fit.rate = -sxy / sxx;
  return fit;
}

/// max |v| over t in [t_begin, t_end].
inline double peak_abs(std::span<const double> t, std::span<const double> v, double t_begin, double t_end) {
  double m = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_begin && t[i] <= t_end) {
      m = std::max(m, std::abs(v[i]));
      any = true;
    }
  if (!any) throw DegenerateError("peak_abs: empty window");
  return m;
}

}  // namespace rdreg
