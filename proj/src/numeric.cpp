#include "ilab/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "ilab/error.hpp"

namespace ilab {

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) throw DomainError("hurwitz_zeta: need s > 1 and q > 0");
  // Shift the argument until the Euler-Maclaurin remainder is negligible.
  const double shift_to = 24.0;
  CompensatedSum head;
  double a = q;
  while (a < shift_to) {
    head.add(std::pow(a, -s));
    a += 1.0;
  }
  static const double b2k_over_fact[] = {
      1.0 / 6.0 / 2.0,                 // B2/2!
      -1.0 / 30.0 / 24.0,              // B4/4!
      1.0 / 42.0 / 720.0,              // B6/6!
      -1.0 / 30.0 / 40320.0,           // B8/8!
      5.0 / 66.0 / 3628800.0,          // B10/10!
      -691.0 / 2730.0 / 479001600.0,   // B12/12!
      7.0 / 6.0 / 87178291200.0,       // B14/14!
  };
  double tail = std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  // rising product s (s+1) ... (s+2k-2) times a^{-s-2k+1}
  double rise = s;
  double apow = std::pow(a, -s - 1.0);
  for (int k = 0; k < 7; ++k) {
    tail += b2k_over_fact[k] * rise * apow;
    rise *= (s + 2.0 * k + 1.0) * (s + 2.0 * k + 2.0);
    apow /= a * a;
  }
  head.add(tail);
  return head.value();
}

double power_tail_sum(double s, double n0) { return hurwitz_zeta(s, n0); }

std::vector<std::size_t> log_spaced_indices(std::size_t lo, std::size_t hi, std::size_t count) {
  std::vector<std::size_t> out;
  if (lo == 0 || hi < lo || count == 0) return out;
  if (count == 1 || lo == hi) {
    out.push_back(lo);
    return out;
  }
  const double llo = std::log(static_cast<double>(lo));
  const double lhi = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(count - 1);
    auto n = static_cast<std::size_t>(std::llround(std::exp(llo + t * (lhi - llo))));
    n = std::clamp(n, lo, hi);
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.sse = sse;
  f.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
  f.stderr_slope = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return f;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  return splitmix64_mix(state);
}

}  // namespace ilab
