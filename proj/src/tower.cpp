#include "ilab/tower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"

namespace ilab {

namespace {

double dotp(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

constexpr std::size_t kDeepLevels = 2000000;

}  // namespace

Tower::Tower(const MapModel& m, std::size_t J, std::size_t n_grid, double tol)
    : op_(m, J, n_grid, true), J_(J), n_(n_grid) {
  triple_ = leading_triple(op_, 1.0, tol);
  const auto& h = triple_.h;
  const auto& nu = triple_.nu;
  const double lam = triple_.lambda;

  e_.assign(J + 1, std::vector<double>(n_grid, 0.0));
  op_.add_remainder(h.data(), e_[J].data(), 1.0 / lam);
  for (std::size_t k = J; k >= 1; --k) {
    e_[k - 1] = e_[k];
    op_.add_branch(k, h.data(), e_[k - 1].data(), 1.0 / lam);
  }
  suffix_mass_.assign(J + 2, 0.0);
  {
    CompensatedSum s;
    for (std::size_t k = J + 1; k >= 1; --k) {
      suffix_mass_[k] = s.value();
      s.add(dotp(nu.data(), e_[k - 1].data(), n_grid));
    }
    suffix_mass_[0] = s.value();
  }
  nu_omega_ = dotp(nu.data(), op_.remainder_omega().data(), n_grid);

  // Levels beyond J+1: content of level k has mass (nu(omega)/lambda) * int_0^{x_{k-1}} h.
  if (m.s >= 1.0) {
    deep_beyond_J1_ = std::numeric_limits<double>::infinity();
  } else {
    CompensatedSum s;
    double x = op_.level_points()[J];
    std::size_t last = std::max(kDeepLevels, J + 1000);
    for (std::size_t i = J + 1; i <= last; ++i) {
      x = inverse_branch(m, 0, x);
      s.add(pl_integral(h, 0.0, x));
    }
    // flow approximation x_i ~ (r s (i + n0))^{-1/s} for the remaining levels
    const double rs = m.r * m.s;
    const double n0 = std::pow(x, -m.s) / rs - static_cast<double>(last);
    const double dx = 1.0 / static_cast<double>(n_grid - 1);
    const double h0 = h[0], h1 = h[1];
    double S1 = std::pow(rs, -1.0 / m.s) * hurwitz_zeta(1.0 / m.s, static_cast<double>(last + 1) + n0);
    double S2 = m.s < 2.0 ? std::pow(rs, -2.0 / m.s) * hurwitz_zeta(2.0 / m.s, static_cast<double>(last + 1) + n0) : 0.0;
    s.add(h0 * S1 + (h1 - h0) * S2 / (2.0 * dx));
    deep_beyond_J1_ = nu_omega_ / lam * s.value();
  }
}

void Tower::add_level_branch(std::size_t j, const double* f, double* out, double scale) const {
  if (j == J_ + 1)
    op_.add_remainder(f, out, scale / triple_.lambda);
  else
    op_.add_branch(j, f, out, scale / triple_.lambda);
}

void Tower::add_level_branch_adjoint(std::size_t j, const double* v, double* out, double scale) const {
  if (j == J_ + 1)
    op_.add_remainder_adjoint(v, out, scale / triple_.lambda);
  else
    op_.add_branch_adjoint(j, v, out, scale / triple_.lambda);
}

double Tower::level_mass(std::size_t k) const {
  if (k == 0) throw ValidationError("levels start at 1");
  if (k <= J_ + 1) return suffix_mass_[k - 1] - suffix_mass_[k];
  if (!std::isfinite(deep_beyond_J1_)) return std::numeric_limits<double>::quiet_NaN();
  double x = op_.level_points()[J_];
  for (std::size_t i = J_ + 1; i < k; ++i) x = inverse_branch(map(), 0, x);
  return nu_omega_ / triple_.lambda * pl_integral(triple_.h, 0.0, x);
}

double Tower::mass_beyond(std::size_t K) const {
  if (K <= J_ + 1) return suffix_mass_[K] + deep_beyond_J1_;
  if (!std::isfinite(deep_beyond_J1_)) return deep_beyond_J1_;
  CompensatedSum s;
  s.add(deep_beyond_J1_);
  double x = op_.level_points()[J_];
  for (std::size_t i = J_ + 1; i < K; ++i) {
    x = inverse_branch(map(), 0, x);
    s.add(-nu_omega_ / triple_.lambda * pl_integral(triple_.h, 0.0, x));
  }
  return s.value();
}

std::vector<double> Tower::return_law() const {
  std::vector<double> p(J_), tmp(n_);
  for (std::size_t j = 1; j <= J_; ++j) {
    std::fill(tmp.begin(), tmp.end(), 0.0);
    add_level_branch(j, triple_.h.data(), tmp.data());
    p[j - 1] = dotp(triple_.nu.data(), tmp.data(), n_);
  }
  return p;
}

std::vector<double> Tower::indicator_row(double a, double b) const {
  auto chi = indicator_fractions(n_, a, b);
  for (std::size_t i = 0; i < n_; ++i) chi[i] *= triple_.nu[i];
  return chi;
}

std::vector<double> Tower::function_row(std::size_t l, const std::function<double(double)>& g) const {
  if (l < 1 || l > J_) throw ValidationError("function_row: level outside explicit branches");
  std::vector<double> row(n_);
  for (std::size_t i = 0; i < n_; ++i) row[i] = triple_.nu[i] * g(op_.branch_point(l, i));
  return row;
}

std::vector<std::vector<std::vector<double>>> Tower::evolve(const std::vector<LevelContent>& cols,
                                                            std::size_t n_max) const {
  if (n_max > J_) throw ValidationError("evolve: horizon exceeds the explicit branches");
  const std::size_t C = cols.size();
  std::vector<std::vector<std::vector<double>>> psi(C, std::vector<std::vector<double>>(n_max + 1));
  std::vector<double> buf(n_);
  for (std::size_t n = 0; n <= n_max; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      auto& out = psi[c][n];
      if (cols[c].level && cols[c].level(n + 1, buf))
        out = buf;
      else
        out.assign(n_, 0.0);
    }
    for (std::size_t j = 1; j <= n; ++j)
      for (std::size_t c = 0; c < C; ++c) add_level_branch(j, psi[c][n - j].data(), psi[c][n].data());
  }
  return psi;
}

std::vector<double> Tower::level_at(const std::vector<std::vector<double>>& psi, std::size_t l, std::size_t n) const {
  if (l < 1 || n + l - 1 >= psi.size()) throw ValidationError("level_at: sequence too short");
  std::vector<double> out = psi[n + l - 1];
  for (std::size_t i = 1; i < l; ++i) add_level_branch(i, psi[n + l - 1 - i].data(), out.data(), -1.0);
  return out;
}

std::vector<double> Tower::pair(const LevelContent& c, const std::vector<std::vector<double>>& psi,
                                const LevelObservable& obs, std::size_t n_max) const {
  const std::size_t L = obs.levels();
  if (L + n_max > J_) throw ValidationError("pair: observable depth plus horizon exceeds the explicit branches");
  if (psi.size() < n_max) throw ValidationError("pair: level-1 sequence too short");
  const auto& nu = triple_.nu;
  std::vector<double> P(n_max + 1, 0.0);

  // Part 1: initial content that has only been shifted.
  std::vector<double> buf(n_), cm(J_ + 2, 0.0);
  for (std::size_t k = 1; k <= J_; ++k) {
    if (!c.level || !c.level(k, buf)) continue;
    cm[k] = dotp(nu.data(), buf.data(), n_);
    for (std::size_t l = 1; l <= L; ++l) {
      if (k < l || k - l > n_max) continue;
      P[k - l] += dotp(obs.rows[l - 1].data(), buf.data(), n_);
    }
  }
  if (obs.gamma != 0.0) {
    std::vector<double> suffix(J_ + 2, 0.0);  // suffix[K] = sum_{K<k<=J} cm_k + deep
    suffix[J_] = c.deep_mass;
    for (std::size_t k = J_; k >= 1; --k) suffix[k - 1] = suffix[k] + cm[k];
    for (std::size_t n = 0; n <= n_max; ++n) P[n] += obs.gamma * suffix[L + n];
  }

  // Part 2: content re-injected from level 1 at time m+1 and observed at time n.
  if (n_max == 0) return P;
  std::vector<std::vector<double>> kappa(n_max, std::vector<double>(n_, 0.0));
  std::vector<double> Pi(n_, 0.0);
  if (obs.gamma != 0.0) {
    add_level_branch_adjoint(J_ + 1, nu.data(), Pi.data());
    for (std::size_t j = J_; j > L + n_max - 1; --j) add_level_branch_adjoint(j, nu.data(), Pi.data());
  }
  for (std::size_t cc = n_max; cc-- > 0;) {
    auto& kap = kappa[cc];
    for (std::size_t l = 1; l <= L; ++l) add_level_branch_adjoint(l + cc, obs.rows[l - 1].data(), kap.data());
    if (obs.gamma != 0.0) {
      // Pi holds sum over j > L + cc
      for (std::size_t i = 0; i < n_; ++i) kap[i] += obs.gamma * Pi[i];
      if (L + cc >= 1) add_level_branch_adjoint(L + cc, nu.data(), Pi.data());
    }
  }
  for (std::size_t n = 1; n <= n_max; ++n) {
    CompensatedSum s;
    for (std::size_t m = 0; m < n; ++m) s.add(dotp(kappa[n - 1 - m].data(), psi[m].data(), n_));
    P[n] += s.value();
  }
  return P;
}

double Tower::stationary_pairing(const LevelObservable& obs) const {
  CompensatedSum s;
  for (std::size_t l = 1; l <= obs.levels(); ++l) s.add(dotp(obs.rows[l - 1].data(), e_[l - 1].data(), n_));
  if (obs.gamma != 0.0) s.add(obs.gamma * mass_beyond(obs.levels()));
  return s.value();
}

}  // namespace ilab
