#include "ilab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"
#include "ilab/parallel.hpp"

namespace ilab {

InducedOperator::InducedOperator(const MapModel& m, std::size_t N, std::size_t n_grid, bool with_remainder)
    : map_(m), N_(N), n_(n_grid), with_remainder_(with_remainder) {
  if (N < 1) throw ValidationError("branch cutoff N must be at least 1");
  if (n_grid < 64) throw ValidationError("n_grid must be at least 64");
  idx_.resize(N * n_grid);
  w0_.resize(N * n_grid);
  w1_.resize(N * n_grid);
  parallel_for(0, n_grid, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double y = grid_node(n_grid, i);
      double x = 0.5 * (1.0 + y), d = 0.5;
      for (std::size_t k = 1; k <= N; ++k) {
        if (k > 1) {
          x = inverse_branch(m, 0, x);
          d /= 1.0 + m.r * (1.0 + m.s) * std::pow(x, m.s);
        }
        std::size_t c;
        double t;
        pl_locate(n_grid, x, c, t);
        std::size_t at = (k - 1) * n_grid + i;
        idx_[at] = static_cast<std::int32_t>(c);
        w0_[at] = d * (1.0 - t);
        w1_[at] = d * t;
      }
    }
  });
  BranchGeometry g = level_sets(m, N + 1);
  xk_.assign(g.x.begin(), g.x.begin() + static_cast<std::ptrdiff_t>(N + 1));
  if (with_remainder_) build_remainder();
}

void InducedOperator::build_remainder() {
  // branches beyond N collapse onto the shape of G_{N+1}' times the mass of (0, x_N]
  omega_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) omega_[i] = induced_inverse_branch(map_, N_ + 1, grid_node(n_, i)).dx;
  double len = map_.r * std::pow(inverse_branch(map_, 0, xk_[N_]), 1.0 + map_.s);
  for (double& w : omega_) w /= len;
  rem_row_ = interval_row(n_, 0.0, xk_[N_]);
}

InducedOperator InducedOperator::markov(const MapModel& m, const std::vector<double>& p, std::size_t n_grid) {
  InducedOperator op(m, p.size(), n_grid, false);
  op.markov_ = true;
  for (std::size_t k = 1; k <= op.N_; ++k) {
    for (std::size_t i = 0; i < n_grid; ++i) {
      std::size_t at = (k - 1) * n_grid + i;
      double d = op.w0_[at] + op.w1_[at];
      double t = d > 0 ? op.w1_[at] / d : 0.0;
      op.w0_[at] = p[k - 1] * (1.0 - t);
      op.w1_[at] = p[k - 1] * t;
    }
  }
  return op;
}

Coeffs InducedOperator::power_coeffs(double z, int order) const {
  Coeffs c;
  c.branch.resize(N_);
  for (std::size_t k = 1; k <= N_; ++k)
    c.branch[k - 1] = std::pow(static_cast<double>(k), order) * std::pow(z, static_cast<double>(k));
  if (with_remainder_ && order == 0) c.remainder = std::pow(z, static_cast<double>(N_ + 1));
  return c;
}

void InducedOperator::add_branch(std::size_t k, const double* f, double* out, double scale) const {
  const std::size_t base = (k - 1) * n_;
  const std::int32_t* id = idx_.data() + base;
  const double* a = w0_.data() + base;
  const double* b = w1_.data() + base;
  for (std::size_t i = 0; i < n_; ++i) out[i] += scale * (a[i] * f[id[i]] + b[i] * f[id[i] + 1]);
}

void InducedOperator::add_branch_adjoint(std::size_t k, const double* v, double* out, double scale) const {
  const std::size_t base = (k - 1) * n_;
  const std::int32_t* id = idx_.data() + base;
  const double* a = w0_.data() + base;
  const double* b = w1_.data() + base;
  for (std::size_t i = 0; i < n_; ++i) {
    out[id[i]] += scale * a[i] * v[i];
    out[id[i] + 1] += scale * b[i] * v[i];
  }
}

void InducedOperator::add_remainder(const double* f, double* out, double scale) const {
  if (!with_remainder_) return;
  double mass = 0.0;
  for (std::size_t i = 0; i < n_; ++i) mass += rem_row_[i] * f[i];
  for (std::size_t i = 0; i < n_; ++i) out[i] += scale * mass * omega_[i];
}

void InducedOperator::add_remainder_adjoint(const double* v, double* out, double scale) const {
  if (!with_remainder_) return;
  double mass = 0.0;
  for (std::size_t i = 0; i < n_; ++i) mass += omega_[i] * v[i];
  for (std::size_t i = 0; i < n_; ++i) out[i] += scale * mass * rem_row_[i];
}

void InducedOperator::apply(const Coeffs& c, const std::vector<double>& f, std::vector<double>& out) const {
  out.assign(n_, 0.0);
  parallel_for(0, n_, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = 1; k <= N_; ++k) {
      double ck = c.branch[k - 1];
      if (ck == 0.0) continue;
      const std::size_t base = (k - 1) * n_;
      for (std::size_t i = lo; i < hi; ++i) {
        std::size_t j = static_cast<std::size_t>(idx_[base + i]);
        out[i] += ck * (w0_[base + i] * f[j] + w1_[base + i] * f[j + 1]);
      }
    }
  });
  if (c.remainder != 0.0) add_remainder(f.data(), out.data(), c.remainder);
}

void InducedOperator::apply_adjoint(const Coeffs& c, const std::vector<double>& v, std::vector<double>& out) const {
  out.assign(n_, 0.0);
  for (std::size_t k = 1; k <= N_; ++k) {
    if (c.branch[k - 1] == 0.0) continue;
    add_branch_adjoint(k, v.data(), out.data(), c.branch[k - 1]);
  }
  if (c.remainder != 0.0) add_remainder_adjoint(v.data(), out.data(), c.remainder);
}

double InducedOperator::branch_point(std::size_t k, std::size_t i) const {
  std::size_t at = (k - 1) * n_ + i;
  double d = w0_[at] + w1_[at];
  double t = d > 0 ? w1_[at] / d : 0.0;
  return (static_cast<double>(idx_[at]) + t) / static_cast<double>(n_ - 1);
}

// ---------------------------------------------------------------------------

namespace {

double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

}  // namespace

EigenTriple leading_triple(const InducedOperator& op, const Coeffs& c, double tol, std::size_t max_iter) {
  const std::size_t n = op.n_grid();
  std::vector<double> h(n, 1.0), nu = trapezoid_weights(n), hn, nun;
  double dh = 1.0, dnu = 1.0;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    op.apply(c, h, hn);
    double s = sup_norm(hn);
    if (!(s > 0.0)) throw NumericalError("operator annihilated the iterate", 0.0);
    for (double& v : hn) v /= s;
    op.apply_adjoint(c, nu, nun);
    double t = 0.0;
    for (double v : nun) t += v;
    for (double& v : nun) v /= t;
    dh = 0.0;
    for (std::size_t i = 0; i < n; ++i) dh = std::max(dh, std::abs(hn[i] - h[i]));
    dnu = 0.0;
    for (std::size_t i = 0; i < n; ++i) dnu += std::abs(nun[i] - nu[i]);
    h.swap(hn);
    nu.swap(nun);
    if (dh <= tol && dnu <= tol) break;
  }
  if (it == max_iter) throw NumericalError("leading_triple did not converge", std::max(dh, dnu));
  EigenTriple e;
  op.apply(c, h, hn);
  double nh = dot(nu, h);
  e.lambda = dot(nu, hn) / nh;
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(hn[i] - e.lambda * h[i]));
  e.residual = res / sup_norm(h);
  for (double& v : h) v /= nh;
  e.h = std::move(h);
  e.nu = std::move(nu);
  e.nu_h = dot(e.nu, e.h);
  e.N = op.N();
  e.n_grid = n;
  e.iterations = it + 1;
  e.z = c.branch.empty() ? 0.0 : c.branch[0];
  return e;
}

EigenTriple leading_triple(const InducedOperator& op, double z, double tol, std::size_t max_iter) {
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("leading_triple: z must lie in (0,1]");
  EigenTriple e = leading_triple(op, op.power_coeffs(z, 0), tol, max_iter);
  e.z = z;
  return e;
}

void write_triple_csv(std::ostream& out, const EigenTriple& t) {
  out << std::setprecision(17) << "# lambda=" << t.lambda << ",z=" << t.z << ",N=" << t.N
      << ",n_grid=" << t.n_grid << "\n";
  out << "x,h,nu\n";
  for (std::size_t i = 0; i < t.n_grid; ++i) out << grid_node(t.n_grid, i) << ',' << t.h[i] << ',' << t.nu[i] << '\n';
}

// ---------------------------------------------------------------------------

CylinderMeasures cylinder_measures(const EigenTriple& t, const MapModel& m, std::size_t n_max) {
  const std::size_t n = t.n_grid;
  auto w = trapezoid_weights(n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = t.h[i] * t.nu[i] / w[i];
  BranchGeometry geo = level_sets(m, n_max);
  std::vector<double> p(n_max);
  CompensatedSum tot;
  for (std::size_t k = 1; k <= n_max; ++k) {
    p[k - 1] = pl_integral(g, geo.x[k], geo.x[k - 1]);
    tot.add(p[k - 1]);
  }
  CylinderMeasures cm;
  cm.law.probs = std::move(p);
  cm.law.normalized = false;
  cm.total = tot.value();
  cm.deficit = pl_integral(g, 0.0, geo.x[n_max]);
  return cm;
}

PressureResult fd_pressure(const InducedOperator& op, double fd_step, int order, double tol) {
  if (order < 1 || order > 2) throw ValidationError("pressure derivative order must be 1 or 2");
  if (!(fd_step > 0.0 && fd_step < 0.1)) throw ValidationError("fd_step must lie in (0, 0.1)");
  auto P = [&](int j) { return std::log(leading_triple(op, std::exp(-j * fd_step), tol).lambda); };
  PressureResult r;
  r.order = order;
  EigenTriple t1 = leading_triple(op, 1.0, tol);
  double P0 = std::log(t1.lambda), P1 = P(1), P2 = P(2);
  r.P1 = P0;
  double D1 = (P0 - P1) / fd_step;
  double D2 = (P0 - P2) / (2.0 * fd_step);
  r.dP = 2.0 * D1 - D2;
  std::vector<double> mh;
  op.apply(op.power_coeffs(1.0, 1), t1.h, mh);
  r.dP_exact = dot(t1.nu, mh) / t1.lambda;
  if (order == 2) {
    double P4 = P(4);
    double S1 = (P0 - 2.0 * P1 + P2) / (fd_step * fd_step);
    double S2 = (P0 - 2.0 * P2 + P4) / (4.0 * fd_step * fd_step);
    r.d2P = 2.0 * S1 - S2;
  }
  if (!op.markov_mode()) {
    CylinderMeasures cm = cylinder_measures(t1, op.map(), op.N());
    CompensatedSum s;
    for (std::size_t k = 1; k <= op.N(); ++k) s.add(static_cast<double>(k) * cm.law.probs[k - 1]);
    r.M1 = s.value();
    r.deficit = cm.deficit;
  }
  return r;
}

PressureResult pressure_and_derivatives(const MapModel& m, std::size_t N, std::size_t n_grid, double fd_step,
                                        int order) {
  double d = 1.0 / m.s - 1.0;
  if ((order >= 1 && !(d > 0.0)) || (order >= 2 && !(d > 1.0)))
    throw DomainError("insufficient ergodic degree");
  InducedOperator op(m, N, n_grid);
  return fd_pressure(op, fd_step, order);
}

double sigma_finite_density(const EigenTriple& t, const MapModel& m, std::size_t N_e, double x) {
  if (x == 0.0) throw DomainError("e(x) diverges at the indifferent fixed point");
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("sigma_finite_density: x outside (0,1]");
  CompensatedSum s;
  double y = x, d = 1.0;
  s.add(pl_eval(t.h, y));
  for (std::size_t n = 1; n <= N_e; ++n) {
    y = inverse_branch(m, 0, y);
    d /= 1.0 + m.r * (1.0 + m.s) * std::pow(y, m.s);
    s.add(pl_eval(t.h, y) * d);
  }
  return s.value();
}

OriginalOpResult original_op_apply(const MapModel& m, const GridFn& f) {
  const std::size_t n = f.size();
  OriginalOpResult r;
  r.L.resize(n);
  r.L0.resize(n);
  r.L1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = grid_node(n, i);
    double a = inverse_branch(m, 0, y);
    r.L0[i] = f(a) / (1.0 + m.r * (1.0 + m.s) * std::pow(a, m.s));
    r.L1[i] = 0.5 * f(0.5 * (1.0 + y));
    r.L[i] = r.L0[i] + r.L1[i];
  }
  return r;
}

double identity_check(const MapModel& m, double z, const GridFn& f, std::size_t N) {
  const std::size_t n = f.size();
  auto left = [&](double x) {
    double a = inverse_branch(m, 0, x);
    return f(a) / (1.0 + m.r * (1.0 + m.s) * std::pow(a, m.s));
  };
  auto g = [&](double x) { return f(x) - z * left(x); };  // (1 - z L_0) f
  double res = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double y = grid_node(n, i);
    CompensatedSum mg;
    double x = 0.5 * (1.0 + y), d = 0.5, zk = z;
    for (std::size_t k = 1; k <= N && zk != 0.0; ++k) {
      if (k > 1) {
        x = inverse_branch(m, 0, x);
        d /= 1.0 + m.r * (1.0 + m.s) * std::pow(x, m.s);
      }
      mg.add(zk * d * g(x));
      zk *= z;
    }
    double lhs = g(y) - mg.value();
    double rhs = f(y) - z * (left(y) + 0.5 * f(0.5 * (1.0 + y)));
    res = std::max(res, std::abs(lhs - rhs));
  }
  return res;
}

std::vector<double> gibbs_ratios(const EigenTriple& t, const MapModel& m,
                                 const std::vector<std::vector<std::size_t>>& words) {
  const std::size_t n = t.n_grid;
  auto w = trapezoid_weights(n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = t.h[i] * t.nu[i] / w[i];
  std::vector<double> out;
  out.reserve(words.size());
  for (const auto& word : words) {
    double a = 0.0, b = 1.0, c = 0.5, dc = 1.0;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      a = induced_inverse_branch(m, *it, a).x;
      b = induced_inverse_branch(m, *it, b).x;
      BranchPoint bp = induced_inverse_branch(m, *it, c);
      c = bp.x;
      dc *= bp.dx;
    }
    out.push_back(pl_integral(g, a, b) / dc);
  }
  return out;
}

std::vector<double> weak_gibbs_trace(const TailLaw& p, const MapModel& m, std::size_t n_lo, std::size_t n_hi) {
  if (!(n_lo >= 1 && n_lo <= n_hi)) throw ValidationError("weak_gibbs_trace: bad range");
  TailSums ts = tail_sums(p, n_hi);
  BranchGeometry geo = level_sets(m, n_hi);
  std::vector<double> out;
  for (std::size_t k = n_lo; k <= n_hi; ++k) out.push_back(ts.d[k - 1] / geo.len[k]);
  return out;
}

BatchMeans induced_orbit_variance(const MapModel& m, std::size_t steps, std::size_t batches,
                                  std::uint64_t seed, std::size_t burn_in) {
  if (batches < 2 || steps < batches) throw ValidationError("need at least two nonempty batches");
  SplitMix64 rng(seed);
  double x = rng.uniform_open();
  auto step = [&]() -> double {
    // floating-point orbits can fall onto the fixed points 0 or 1; restart from a fresh point
    if (!(x > 1e-300 && x < 1.0)) x = rng.uniform_open();
    InducedEval e = induced_apply(m, x, 100000000);
    if (e.overflow) {
      x = rng.uniform_open();
      return static_cast<double>(e.tau);
    }
    x = e.G;
    return static_cast<double>(e.tau);
  };
  for (std::size_t i = 0; i < burn_in; ++i) step();
  std::size_t b = steps / batches;
  std::vector<double> sums(batches, 0.0);
  CompensatedSum total;
  for (std::size_t j = 0; j < batches; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < b; ++i) s += step();
    sums[j] = s;
    total.add(s);
  }
  BatchMeans r;
  r.steps = b * batches;
  r.mean = total.value() / static_cast<double>(r.steps);
  double var = 0.0;
  for (double s : sums) var += (s - r.mean * b) * (s - r.mean * b);
  var /= static_cast<double>(batches - 1);
  r.sigma2 = var / static_cast<double>(b);
  r.stderr_sigma2 = r.sigma2 * std::sqrt(2.0 / static_cast<double>(batches - 1));
  return r;
}

}  // namespace ilab
