#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "rdreg/numkit/matrix.hpp"

namespace rdreg {

/// Uniform partition of [0, 1] into `intervals` cells (intervals + 1 nodes).
class UniformGrid {
 public:
  UniformGrid() = default;
  explicit UniformGrid(std::size_t intervals) : intervals_(intervals) {
    require(intervals >= 2, "UniformGrid: need at least 3 nodes");
  }

  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_ + 1; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(intervals_); }
  double node(std::size_t i) const noexcept { return static_cast<double>(i) / static_cast<double>(intervals_); }

  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;

 private:
  std::size_t intervals_ = 2;
};

/// Samples of a function on a UniformGrid. T is double or Row2.
template <class T>
struct GridFunction {
  UniformGrid grid;
  std::vector<T> values;

  GridFunction() = default;
  explicit GridFunction(UniformGrid g, T fill = T{}) : grid(g), values(g.size(), fill) {}
  GridFunction(UniformGrid g, std::vector<T> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), "GridFunction: sample count does not match grid");
  }

  std::size_t size() const noexcept { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }
  const T& front() const { return values.front(); }
  const T& back() const { return values.back(); }
};

using ScalarGrid = GridFunction<double>;
using RowGrid = GridFunction<Row2>;

template <class F>
auto sample(UniformGrid grid, F&& fn) {
  using T = std::decay_t<decltype(fn(0.0))>;
  GridFunction<T> out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = fn(grid.node(i));
  return out;
}

/// Composite quadrature weights: Simpson for an even number of intervals,
/// trapezoid otherwise.
inline std::vector<double> quadrature_weights(UniformGrid grid) {
  const std::size_t m = grid.intervals();
  const double h = grid.spacing();
  std::vector<double> w(m + 1);
  if (m % 2 == 0) {
    for (std::size_t i = 0; i <= m; ++i) w[i] = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (double& v : w) v *= h / 3.0;
  } else {
    for (std::size_t i = 0; i <= m; ++i) w[i] = (i == 0 || i == m) ? 0.5 * h : h;
  }
  return w;
}

inline double quad(const ScalarGrid& f) {
  const auto w = quadrature_weights(f.grid);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

inline Row2 quad(const RowGrid& f) {
  const auto w = quadrature_weights(f.grid);
  Row2 s{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) s = s + w[i] * f[i];
  return s;
}

/// Trapezoid sum; the quantity conserved by the ghost-node Neumann scheme.
inline double trapezoid(const ScalarGrid& f) {
  const double h = f.grid.spacing();
  double s = 0.5 * (f.values.front() + f.values.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

inline double l2_norm(const ScalarGrid& f) {
  ScalarGrid sq(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
  return std::sqrt(std::max(quad(sq), 0.0));
}

inline double sup_norm(const ScalarGrid& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

inline double sup_norm(const RowGrid& f) {
  double m = 0.0;
  for (const Row2& v : f.values) m = std::max({m, std::abs(v[0]), std::abs(v[1])});
  return m;
}

}  // namespace rdreg
