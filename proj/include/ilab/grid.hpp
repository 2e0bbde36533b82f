#pragma once

#include <cstddef>
#include <vector>

namespace ilab {

/// Nodal values on the uniform grid x_i = i/(n-1), read as a piecewise-linear function.
struct GridFn {
  std::vector<double> values;

  GridFn() = default;
  explicit GridFn(std::size_t n, double v = 0.0) : values(n, v) {}
  explicit GridFn(std::vector<double> v) : values(std::move(v)) {}
  std::size_t size() const { return values.size(); }
  double operator()(double x) const;
};

inline double grid_node(std::size_t n, std::size_t i) {
  return static_cast<double>(i) / static_cast<double>(n - 1);
}

/// Piecewise-linear interpolant of f at x in [0,1].
double pl_eval(const std::vector<double>& f, double x);

/// Locates x in the grid: cell index c in [0, n-2] and the local fraction t in [0,1].
inline void pl_locate(std::size_t n, double x, std::size_t& c, double& t) {
  double u = x * static_cast<double>(n - 1);
  if (u <= 0.0) {
    c = 0;
    t = 0.0;
    return;
  }
  c = static_cast<std::size_t>(u);
  if (c >= n - 1) {
    c = n - 2;
    t = 1.0;
    return;
  }
  t = u - static_cast<double>(c);
}

std::vector<double> trapezoid_weights(std::size_t n);

/// row[i] = integral over [a,b] of the i-th hat function, so row . f = integral of the interpolant.
std::vector<double> interval_row(std::size_t n, double a, double b);
void add_interval_row(std::vector<double>& row, double a, double b, double scale = 1.0);

/// Exact integral of the interpolant of f over [a,b].
double pl_integral(const std::vector<double>& f, double a, double b);

/// Fraction of each hat's mass lying in [a,b] (the hat-basis projection of an indicator).
std::vector<double> indicator_fractions(std::size_t n, double a, double b);

template <class F>
GridFn sample(std::size_t n, F&& f) {
  GridFn g(n);
  for (std::size_t i = 0; i < n; ++i) g.values[i] = f(grid_node(n, i));
  return g;
}

}  // namespace ilab
