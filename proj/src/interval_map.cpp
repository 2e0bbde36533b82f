#include "ilab/interval_map.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <ostream>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"

namespace ilab {

MapModel make_lsv(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("intermittency exponent s must be positive");
  MapModel m;
  m.s = s;
  m.r = std::pow(2.0, s);
  m.q = 0.5;
  return m;
}

MapModel parse_map_spec(const std::string& spec) {
  const std::string prefix = "lsv:s=";
  if (spec.rfind(prefix, 0) != 0) throw ValidationError("map spec must look like lsv:s=<v>");
  std::string v = spec.substr(prefix.size());
  std::size_t pos = 0;
  double s = 0.0;
  try {
    s = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ValidationError("bad s in map spec '" + spec + "'");
  }
  if (pos != v.size()) throw ValidationError("bad s in map spec '" + spec + "'");
  return make_lsv(s);
}

std::string map_spec_string(const MapModel& m) {
  std::ostringstream os;
  os << std::setprecision(17) << m.kind << ":s=" << m.s;
  return os.str();
}

MapEval map_apply_deriv(const MapModel& m, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("map: x outside [0,1]");
  if (x <= m.q) {
    double xs = std::pow(x, m.s);
    return {x * (1.0 + m.r * xs), 1.0 + m.r * (1.0 + m.s) * xs};
  }
  return {2.0 * x - 1.0, 2.0};
}

namespace {

// Solve x + r x^{1+s} = y on [0, q]. phi is convex increasing, so Newton from the
// left of the root overshoots once and then decreases monotonically.
double left_inverse(const MapModel& m, double y) {
  if (y == 0.0) return 0.0;
  double lo = y / (1.0 + m.r * std::pow(y, m.s));
  double hi = std::min(y, m.q);
  if (lo > hi) lo = 0.0;
  double x = lo;
  for (int it = 0; it < 200; ++it) {
    double xs = std::pow(x, m.s);
    double phi = x * (1.0 + m.r * xs) - y;
    if (phi == 0.0) return x;
    if (phi < 0.0)
      lo = std::max(lo, x);
    else
      hi = std::min(hi, x);
    double dphi = 1.0 + m.r * (1.0 + m.s) * xs;
    double nx = x - phi / dphi;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x || hi - lo <= 0.0) return nx;
    x = nx;
  }
  double res = x * (1.0 + m.r * std::pow(x, m.s)) - y;
  if (std::abs(res) <= 1e-14) return x;
  throw NumericalError("inverse branch did not converge", res);
}

}  // namespace

double inverse_branch(const MapModel& m, int branch, double y) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("inverse branch: y outside [0,1]");
  if (branch == 0) return left_inverse(m, y);
  if (branch == 1) return 0.5 * (1.0 + y);
  throw ValidationError("branch must be 0 or 1");
}

double inverse_branch_deriv(const MapModel& m, int branch, double y) {
  if (branch == 1) return 0.5;
  double x = inverse_branch(m, 0, y);
  return 1.0 / (1.0 + m.r * (1.0 + m.s) * std::pow(x, m.s));
}

Passage first_passage(const MapModel& m, double x, std::size_t cap) {
  if (x == 0.0) throw DomainError("first passage undefined at the indifferent fixed point");
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("first passage: x outside (0,1]");
  Passage p{1, false};
  while (x <= m.q) {
    if (p.tau >= cap) {
      p.overflow = true;
      return p;
    }
    x = map_apply_deriv(m, x).F;
    ++p.tau;
  }
  return p;
}

BranchGeometry level_sets(const MapModel& m, std::size_t n_max) {
  if (n_max < 1) throw ValidationError("level_sets: n_max must be at least 1");
  BranchGeometry g;
  g.n_max = n_max;
  g.x.resize(n_max + 1);
  g.len.assign(n_max + 1, 0.0);
  g.x[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    g.x[n] = inverse_branch(m, 0, g.x[n - 1]);
    // x_{n-1} - x_n = F(x_n) - x_n
    g.len[n] = m.r * std::pow(g.x[n], 1.0 + m.s);
  }
  return g;
}

void write_geometry_csv(std::ostream& out, const BranchGeometry& g) {
  out << "n,x_n,len_n\n" << std::setprecision(17);
  for (std::size_t n = 0; n <= g.n_max; ++n) out << n << ',' << g.x[n] << ',' << g.len[n] << '\n';
}

InducedEval induced_apply(const MapModel& m, double x, std::size_t cap) {
  if (x == 0.0) throw DomainError("induced map undefined at the indifferent fixed point");
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("induced map: x outside (0,1]");
  InducedEval r{x, 1.0, 0, false};
  for (;;) {
    if (r.tau >= cap) {
      r.overflow = true;
      return r;
    }
    bool right = r.G > m.q;
    MapEval e = map_apply_deriv(m, r.G);
    r.G = e.F;
    r.dG *= e.dF;
    ++r.tau;
    if (right) return r;
  }
}

BranchPoint induced_inverse_branch(const MapModel& m, std::size_t k, double y) {
  if (k < 1) throw ValidationError("induced branch index starts at 1");
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("induced inverse branch: y outside [0,1]");
  BranchPoint b{0.5 * (1.0 + y), 0.5};
  for (std::size_t j = 1; j < k; ++j) {
    b.x = left_inverse(m, b.x);
    b.dx /= 1.0 + m.r * (1.0 + m.s) * std::pow(b.x, m.s);
  }
  return b;
}

std::vector<double> distortion_check(const MapModel& m, std::size_t ell_max, std::size_t n_samples,
                                     std::uint64_t seed, std::size_t k_cut) {
  if (k_cut < 1) throw ValidationError("distortion_check: k_cut must be at least 1");
  std::vector<double> sup(ell_max + 1, 0.0);
  SplitMix64 rng(seed);
  std::vector<std::size_t> word;
  for (std::size_t ell = 0; ell <= ell_max; ++ell) {
    for (std::size_t i = 0; i < n_samples; ++i) {
      word.resize(ell + 1);
      for (auto& k : word) k = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(k_cut));
      // w = G_{k_1} o ... o G_{k_ell}(y); x = G_{k_0}(w) shares the depth ell+1 cylinder
      double w1 = rng.uniform(), w2 = rng.uniform();
      for (std::size_t j = ell; j >= 1; --j) {
        w1 = induced_inverse_branch(m, word[j], w1).x;
        w2 = induced_inverse_branch(m, word[j], w2).x;
      }
      double d1 = induced_inverse_branch(m, word[0], w1).dx;
      double d2 = induced_inverse_branch(m, word[0], w2).dx;
      sup[ell] = std::max(sup[ell], std::abs(std::log(d1 / d2)));
    }
  }
  return sup;
}

std::vector<int> coding(const MapModel& m, double x, std::size_t n) {
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("coding: x outside (0,1]");
  std::vector<int> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = x > m.q ? 1 : 0;
    x = map_apply_deriv(m, x).F;
  }
  return w;
}

}  // namespace ilab
