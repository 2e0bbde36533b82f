#include "ilab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ilab/error.hpp"

namespace ilab {

double GridFn::operator()(double x) const { return pl_eval(values, x); }

double pl_eval(const std::vector<double>& f, double x) {
  std::size_t c;
  double t;
  pl_locate(f.size(), x, c, t);
  return (1.0 - t) * f[c] + t * f[c + 1];
}

std::vector<double> trapezoid_weights(std::size_t n) {
  if (n < 2) throw ValidationError("grid needs at least two nodes");
  double h = 1.0 / static_cast<double>(n - 1);
  std::vector<double> w(n, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

void add_interval_row(std::vector<double>& row, double a, double b, double scale) {
  const std::size_t n = row.size();
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (!(b > a)) return;
  const double h = 1.0 / static_cast<double>(n - 1);
  std::size_t ca, cb;
  double ta, tb;
  pl_locate(n, a, ca, ta);
  pl_locate(n, b, cb, tb);
  for (std::size_t c = ca; c <= cb; ++c) {
    double t0 = c == ca ? ta : 0.0;
    double t1 = c == cb ? tb : 1.0;
    if (t1 <= t0) continue;
    double sq = 0.5 * (t1 - t0) * (t1 + t0);
    row[c] += scale * h * ((t1 - t0) - sq);
    row[c + 1] += scale * h * sq;
  }
}

std::vector<double> interval_row(std::size_t n, double a, double b) {
  std::vector<double> row(n, 0.0);
  add_interval_row(row, a, b);
  return row;
}

double pl_integral(const std::vector<double>& f, double a, double b) {
  const std::size_t n = f.size();
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (!(b > a)) return 0.0;
  const double h = 1.0 / static_cast<double>(n - 1);
  std::size_t ca, cb;
  double ta, tb;
  pl_locate(n, a, ca, ta);
  pl_locate(n, b, cb, tb);
  double s = 0.0;
  for (std::size_t c = ca; c <= cb; ++c) {
    double t0 = c == ca ? ta : 0.0;
    double t1 = c == cb ? tb : 1.0;
    if (t1 <= t0) continue;
    s += h * (t1 - t0) * (f[c] + 0.5 * (f[c + 1] - f[c]) * (t1 + t0));
  }
  return s;
}

std::vector<double> indicator_fractions(std::size_t n, double a, double b) {
  auto row = interval_row(n, a, b);
  auto w = trapezoid_weights(n);
  for (std::size_t i = 0; i < n; ++i) row[i] /= w[i];
  return row;
}

}  // namespace ilab
