#include "ilab/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"

namespace ilab {

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// F^l restricted to A_l: l-1 left-branch steps followed by the right branch.
double level_coordinate(const MapModel& m, const BranchGeometry& g, std::size_t l, double x) {
  if (x <= g.x[l]) return 0.0;
  if (x >= g.x[l - 1]) return 1.0;
  for (std::size_t i = 1; i < l; ++i) x = x * (1.0 + m.r * std::pow(x, m.s));
  return std::clamp(2.0 * x - 1.0, 0.0, 1.0);
}

// chi[l-1] = hat projection of E's trace on level l, in level coordinates.
std::vector<std::vector<double>> level_indicators(const Tower& tw, const SetSpec& E) {
  const std::size_t L = E.membership_depth;
  if (L == 0) throw ValidationError("set has not been validated");
  BranchGeometry g = level_sets(tw.map(), L);
  std::vector<std::vector<double>> chi(L, std::vector<double>(tw.n_grid(), 0.0));
  for (auto [a, b] : E.intervals) {
    for (std::size_t l = 1; l <= L; ++l) {
      double lo = std::max(a, g.x[l]), hi = std::min(b, g.x[l - 1]);
      if (!(hi > lo)) continue;
      double t0 = level_coordinate(tw.map(), g, l, lo);
      double t1 = level_coordinate(tw.map(), g, l, hi);
      auto f = indicator_fractions(tw.n_grid(), t0, t1);
      for (std::size_t i = 0; i < f.size(); ++i) chi[l - 1][i] += f[i];
    }
  }
  return chi;
}

bool any_nonzero(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });
}

void require_finite_measure(const Tower& tw, const char* what) {
  if (!std::isfinite(tw.M1())) throw DomainError(std::string(what) + " needs a finite invariant measure (s < 1)");
}

}  // namespace

SetSpec parse_set_spec(const std::string& spec) {
  const std::string prefix = "intervals:";
  if (spec.rfind(prefix, 0) != 0) throw ValidationError("set spec must look like intervals:a-b,c-d");
  SetSpec E;
  std::stringstream ss(spec.substr(prefix.size()));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto dash = item.find('-', 1);
    if (dash == std::string::npos) throw ValidationError("bad interval '" + item + "'");
    try {
      double a = std::stod(item.substr(0, dash));
      double b = std::stod(item.substr(dash + 1));
      E.intervals.emplace_back(a, b);
    } catch (const std::invalid_argument&) {
      throw ValidationError("bad interval '" + item + "'");
    }
  }
  if (E.intervals.empty()) throw ValidationError("empty set spec");
  return E;
}

void validate_set(SetSpec& E, const MapModel& m, std::size_t max_depth) {
  if (E.intervals.empty()) throw ValidationError("empty set");
  auto iv = E.intervals;
  std::sort(iv.begin(), iv.end());
  double lowest = 1.0;
  for (std::size_t i = 0; i < iv.size(); ++i) {
    auto [a, b] = iv[i];
    if (!(a >= 0.0 && b <= 1.0 && b > a)) throw ValidationError("intervals must satisfy 0 <= a < b <= 1");
    if (i > 0 && a < iv[i - 1].second) throw ValidationError("intervals must be disjoint");
    lowest = std::min(lowest, a);
  }
  if (!(lowest > 0.0)) throw ValidationError("set touches the indifferent fixed point (not in B_+)");
  double x = 1.0;
  std::size_t L = 0;
  while (x > lowest) {
    if (++L > max_depth) throw ValidationError("set reaches too close to 0 (membership depth exceeds limit)");
    x = inverse_branch(m, 0, x);
  }
  E.membership_depth = std::max<std::size_t>(L, 1);
}

void write_correlation_csv(std::ostream& out, const CorrelationSeries& s) {
  out << "# kind=" << s.kind << '\n';
  for (const auto& [k, v] : s.meta) out << "# " << k << '=' << v << '\n';
  out << (s.ci.empty() ? "n,value\n" : "n,value,ci\n") << std::setprecision(17);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    out << s.n[i] << ',' << s.values[i];
    if (!s.ci.empty()) out << ',' << s.ci[i];
    out << '\n';
  }
}

CorrelationSeries return_density(const Tower& tw, std::size_t n_max) {
  LevelContent c;
  c.level = [&](std::size_t k, std::vector<double>& out) {
    if (k != 1) return false;
    out = tw.content(1);
    return true;
  };
  auto psi = tw.evolve({c}, n_max);
  CorrelationSeries s;
  s.kind = "u";
  for (std::size_t n = 0; n <= n_max; ++n) {
    s.n.push_back(n);
    s.values.push_back(dotv(tw.nu(), psi[0][n]));
  }
  double M1 = tw.M1();
  s.meta["M1"] = fmt(M1);
  s.meta["lambda"] = fmt(tw.lambda());
  s.meta["J"] = std::to_string(tw.J());
  s.meta["n_grid"] = std::to_string(tw.n_grid());
  return s;
}

CorrelationSeries v_from_u(const CorrelationSeries& u, double M1) {
  if (!std::isfinite(M1)) throw DomainError("infinite M_1");
  CorrelationSeries v = u;
  v.kind = "v";
  for (double& x : v.values) x = M1 * x - 1.0;
  return v;
}

SetRates set_rates(const Tower& tw, const SetSpec& E, std::size_t n_max) {
  auto chi = level_indicators(tw, E);
  const std::size_t L = chi.size();
  if (n_max + L - 1 > tw.J()) throw ValidationError("set_rates: horizon plus depth exceeds the explicit branches");
  std::vector<std::vector<double>> rows(L, std::vector<double>(tw.n_grid()));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t i = 0; i < tw.n_grid(); ++i) rows[l][i] = tw.nu()[i] * chi[l][i];
  LevelContent c;
  c.level = [&](std::size_t k, std::vector<double>& out) {
    if (k > L || !any_nonzero(chi[k - 1])) return false;
    out.resize(tw.n_grid());
    const auto& e = tw.content(k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = chi[k - 1][i] * e[i];
    return true;
  };
  auto psi = tw.evolve({c}, n_max + L - 1);
  SetRates r;
  for (std::size_t l = 1; l <= L; ++l) r.measure += dotv(rows[l - 1], tw.content(l));
  for (std::size_t n = 0; n <= n_max; ++n) {
    double j = 0.0;
    for (std::size_t l = 1; l <= L; ++l) {
      if (!any_nonzero(rows[l - 1])) continue;
      j += dotv(rows[l - 1], tw.level_at(psi[0], l, n));
    }
    r.joint.push_back(j);
    r.sigma.push_back(j / (r.measure * r.measure));
  }
  double M1 = tw.M1();
  if (std::isfinite(M1)) {
    for (double j : r.joint) r.mu.push_back(M1 * j / (r.measure * r.measure) - 1.0);
  }
  return r;
}

ComplementCheck complement_identity(const Tower& tw, const SetSpec& E, std::size_t n_max) {
  require_finite_measure(tw, "complement identity");
  const double M1 = tw.M1();
  SetRates sr = set_rates(tw, E, n_max);
  auto chi = level_indicators(tw, E);
  const std::size_t L = chi.size();
  const std::size_t n = tw.n_grid();

  LevelObservable obs;
  obs.gamma = 1.0;
  obs.rows.assign(L, std::vector<double>(n));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t i = 0; i < n; ++i) obs.rows[l][i] = tw.nu()[i] * (1.0 - chi[l][i]);
  LevelContent c;
  c.deep_mass = tw.mass_beyond(tw.J());
  c.level = [&](std::size_t k, std::vector<double>& out) {
    const auto& e = tw.content(k);
    out = e;
    if (k <= L)
      for (std::size_t i = 0; i < n; ++i) out[i] *= 1.0 - chi[k - 1][i];
    return true;
  };
  auto psi = tw.evolve({c}, n_max);
  auto P = tw.pair(c, psi[0], obs, n_max);
  double muc = tw.stationary_pairing(obs);

  ComplementCheck cc;
  const double me = sr.measure / M1, mc = muc / M1;
  for (std::size_t k = 0; k <= n_max; ++k) {
    cc.lhs.push_back(sr.joint[k] / M1 - me * me);
    cc.rhs.push_back(P[k] / M1 - mc * mc);
    cc.max_abs_diff = std::max(cc.max_abs_diff, std::abs(cc.lhs.back() - cc.rhs.back()));
  }
  return cc;
}

CorrelationSeries correlation_operator(const Tower& tw, const std::function<double(double)>& f,
                                       const std::function<double(double)>& g, std::size_t n_max,
                                       std::size_t obs_levels) {
  require_finite_measure(tw, "operator correlation");
  const double M1 = tw.M1();
  const std::size_t n = tw.n_grid();
  if (obs_levels + n_max > tw.J()) throw ValidationError("correlation: horizon plus observable depth exceeds J");
  LevelObservable obs;
  obs.gamma = g(0.0);
  for (std::size_t l = 1; l <= obs_levels; ++l) obs.rows.push_back(tw.function_row(l, g));
  LevelContent c;
  c.deep_mass = f(0.0) * tw.mass_beyond(tw.J());
  c.level = [&](std::size_t k, std::vector<double>& out) {
    const auto& e = tw.content(k);
    out.resize(n);
    if (k > tw.J()) {
      for (std::size_t i = 0; i < n; ++i) out[i] = f(0.0) * e[i];
      return true;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = f(tw.op().branch_point(k, i)) * e[i];
    return true;
  };
  CompensatedSum mf;
  std::vector<double> buf;
  for (std::size_t k = 1; k <= tw.J(); ++k) {
    c.level(k, buf);
    mf.add(dotv(tw.nu(), buf));
  }
  mf.add(c.deep_mass);
  const double mu_f = mf.value();
  const double mu_g = tw.stationary_pairing(obs);

  auto psi = tw.evolve({c}, n_max);
  auto P = tw.pair(c, psi[0], obs, n_max);
  CorrelationSeries s;
  s.kind = "observable";
  for (std::size_t k = 0; k <= n_max; ++k) {
    s.n.push_back(k);
    s.values.push_back(P[k] / M1 - mu_f * mu_g / (M1 * M1));
  }
  s.meta["method"] = "operator";
  s.meta["M1"] = fmt(M1);
  s.meta["mean_f"] = fmt(mu_f / M1);
  s.meta["mean_g"] = fmt(mu_g / M1);
  return s;
}

CorrelationSeries correlation_orbit(const MapModel& m, const std::function<double(double)>& f,
                                    const std::function<double(double)>& g, std::size_t n_max,
                                    std::size_t orbit_len, std::uint64_t seed, std::size_t burn_in) {
  if (m.s >= 1.0) throw DomainError("orbit correlation needs a finite invariant measure (s < 1)");
  const std::size_t B = 20;
  if (orbit_len < B * (n_max + 1)) throw ValidationError("orbit too short for the requested lags");
  SplitMix64 rng(seed);
  double x = rng.uniform_open();
  auto advance = [&]() {
    x = map_apply_deriv(m, x).F;
    // floating-point orbits can land on the fixed points; restart from a fresh point
    if (!(x > 0.0 && x < 1.0)) x = rng.uniform_open();
  };
  for (std::size_t i = 0; i < burn_in; ++i) advance();
  const std::size_t per = orbit_len / B;
  std::vector<double> ring(n_max + 1);
  std::vector<std::vector<double>> est(B, std::vector<double>(n_max + 1));
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<double> acc(n_max + 1, 0.0);
    double sf = 0.0, sg = 0.0;
    std::size_t filled = 0;
    std::vector<std::size_t> cnt(n_max + 1, 0);
    for (std::size_t i = 0; i < per; ++i) {
      double fv = f(x), gv = g(x);
      ring[i % (n_max + 1)] = fv;
      filled = std::min(filled + 1, n_max + 1);
      for (std::size_t l = 0; l < filled; ++l) {
        acc[l] += ring[(i + n_max + 1 - l) % (n_max + 1)] * gv;
        ++cnt[l];
      }
      sf += fv;
      sg += gv;
      advance();
    }
    double mfv = sf / static_cast<double>(per), mgv = sg / static_cast<double>(per);
    for (std::size_t l = 0; l <= n_max; ++l) est[b][l] = acc[l] / static_cast<double>(cnt[l]) - mfv * mgv;
  }
  CorrelationSeries s;
  s.kind = "observable";
  s.meta["method"] = "orbit";
  s.meta["orbit_len"] = std::to_string(orbit_len);
  s.meta["seed"] = std::to_string(seed);
  for (std::size_t l = 0; l <= n_max; ++l) {
    double mean = 0.0;
    for (std::size_t b = 0; b < B; ++b) mean += est[b][l];
    mean /= B;
    double var = 0.0;
    for (std::size_t b = 0; b < B; ++b) var += (est[b][l] - mean) * (est[b][l] - mean);
    var /= B - 1;
    s.n.push_back(l);
    s.values.push_back(mean);
    s.ci.push_back(1.96 * std::sqrt(var / B));
  }
  return s;
}

CorrelationSeries cylinder_wb_sum(const Tower& tw, std::size_t ell, const std::vector<std::size_t>& n_list) {
  if (ell < 1) throw ValidationError("cylinder depth must be at least 1");
  if (ell > 10) throw ResourceError("cylinder depth above 10 is not supported");
  require_finite_measure(tw, "weak-Bernoulli sum");
  if (n_list.empty()) throw ValidationError("empty n list");
  const double M1 = tw.M1();
  const std::size_t n = tw.n_grid();
  const std::size_t W = std::size_t{1} << ell;
  const std::size_t n_top = *std::max_element(n_list.begin(), n_list.end());
  if (n_top + ell - 1 > tw.J()) throw ValidationError("wb sum: horizon exceeds the explicit branches");
  double bytes = static_cast<double>(W) * static_cast<double>(n_top + ell) * static_cast<double>(n) * 8.0;
  if (bytes > 3e9) throw ResourceError("wb sum: cylinder sequences exceed the memory guard");

  // word w has symbol omega_j = bit (ell-1-j); word 0 is the cylinder touching 0
  struct Cyl {
    std::size_t level = 0;
    std::vector<double> chi;  // hat projection in level coordinates
    std::vector<double> row;  // nu * chi
    double measure = 0.0;
  };
  std::vector<Cyl> cyl(W);
  for (std::size_t w = 1; w < W; ++w) {
    std::vector<int> sym(ell);
    for (std::size_t j = 0; j < ell; ++j) sym[j] = static_cast<int>((w >> (ell - 1 - j)) & 1U);
    std::size_t first = 0;
    while (sym[first] == 0) ++first;
    double a = 0.0, b = 1.0;
    for (std::size_t j = ell; j-- > first + 1;) {
      a = inverse_branch(tw.map(), sym[j], a);
      b = inverse_branch(tw.map(), sym[j], b);
    }
    cyl[w].level = first + 1;
    cyl[w].chi = indicator_fractions(n, a, b);
    cyl[w].row = tw.indicator_row(a, b);
    cyl[w].measure = dotv(cyl[w].row, tw.content(cyl[w].level));
  }
  std::vector<LevelContent> cols(W - 1);
  for (std::size_t w = 1; w < W; ++w) {
    const Cyl* cp = &cyl[w];
    cols[w - 1].level = [&tw, cp, n](std::size_t k, std::vector<double>& out) {
      if (k != cp->level) return false;
      out.resize(n);
      const auto& e = tw.content(k);
      for (std::size_t i = 0; i < n; ++i) out[i] = cp->chi[i] * e[i];
      return true;
    };
  }
  auto psi = tw.evolve(cols, n_top + ell - 1);

  double muD = M1;
  for (std::size_t w = 1; w < W; ++w) muD -= cyl[w].measure;
  std::vector<double> mu(W);
  mu[0] = muD;
  for (std::size_t w = 1; w < W; ++w) mu[w] = cyl[w].measure;

  CorrelationSeries s;
  s.kind = "wb_sum";
  s.meta["ell"] = std::to_string(ell);
  s.meta["M1"] = fmt(M1);
  std::vector<std::vector<double>> joint(W, std::vector<double>(W, 0.0));
  for (std::size_t nn : n_list) {
    for (std::size_t e = 1; e < W; ++e) {
      std::vector<std::vector<double>> lev(ell + 1);
      for (std::size_t l = 1; l <= ell; ++l) lev[l] = tw.level_at(psi[e - 1], l, nn);
      double rowsum = 0.0;
      for (std::size_t f = 1; f < W; ++f) {
        joint[e][f] = dotv(cyl[f].row, lev[cyl[f].level]);
        rowsum += joint[e][f];
      }
      joint[e][0] = mu[e] - rowsum;  // conservation of the content started in E
    }
    for (std::size_t f = 0; f < W; ++f) {
      double colsum = 0.0;
      for (std::size_t e = 1; e < W; ++e) colsum += joint[e][f];
      joint[0][f] = mu[f] - colsum;  // invariance of the full measure
    }
    CompensatedSum sum;
    for (std::size_t e = 0; e < W; ++e)
      for (std::size_t f = 0; f < W; ++f) sum.add(std::abs(joint[e][f] / M1 - mu[e] * mu[f] / (M1 * M1)));
    s.n.push_back(nn);
    s.values.push_back(sum.value());
  }
  return s;
}

WanderingRelation wandering_relation(const Tower& tw, std::size_t n_max) {
  if (tw.map().s < 1.0) throw DomainError("wandering relation applies to the infinite-measure case (s >= 1)");
  CorrelationSeries u = return_density(tw, n_max);
  WanderingRelation w;
  double su = 0.0, sw = 0.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    su += u.values[k];
    sw += tw.level_mass(k);
    w.sum_u.push_back(su);
    w.sum_w.push_back(sw);
    w.r.push_back(su * sw / static_cast<double>(k));
  }
  return w;
}

std::function<double(double)> parse_observable(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw ValidationError("observable spec must look like kind:value");
  std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  if (kind == "indicator") {
    SetSpec E = parse_set_spec(arg);
    return [E](double x) {
      for (auto [a, b] : E.intervals)
        if (x >= a && x <= b) return 1.0;
      return 0.0;
    };
  }
  double v;
  try {
    v = std::stod(arg);
  } catch (const std::exception&) {
    throw ValidationError("bad observable parameter '" + arg + "'");
  }
  if (kind == "pow") {
    if (!(v > 0.0)) throw ValidationError("pow exponent must be positive");
    return [v](double x) { return std::pow(x, v); };
  }
  if (kind == "cos") return [v](double x) { return std::cos(2.0 * std::numbers::pi * v * x); };
  throw ValidationError("unknown observable kind '" + kind + "'");
}

}  // namespace ilab
