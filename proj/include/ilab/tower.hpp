#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ilab/interval_map.hpp"
#include "ilab/transfer.hpp"

namespace ilab {

/// Initial content of a density on the levels A_k, each written in the level
/// coordinate t = F^k(x) in [0,1] with the Jacobian folded in.
struct LevelContent {
  /// Fills out with the level-k content and returns true, or returns false for an empty level.
  std::function<bool(std::size_t k, std::vector<double>& out)> level;
  /// nu-mass on all levels beyond the explicit branches.
  double deep_mass = 0.0;
};

/// Observable on levels 1..L given as pairing rows (node weights of nu times the
/// observable in level coordinates); levels beyond L are paired with the constant gamma.
struct LevelObservable {
  std::vector<std::vector<double>> rows;
  double gamma = 0.0;
  std::size_t levels() const { return rows.size(); }
};

/// Exact level decomposition of the original transfer operator at z = 1.
///
/// Level k+1 shifts onto level k unchanged; level 1 re-enters level j through the
/// normalized induced branch M_j / lambda. Branches beyond J are lumped into a rank-one
/// remainder, so the normalized operator conserves nu-mass.
class Tower {
public:
  Tower(const MapModel& m, std::size_t J, std::size_t n_grid, double tol = 1e-13);

  const InducedOperator& op() const { return op_; }
  const EigenTriple& triple() const { return triple_; }
  const MapModel& map() const { return op_.map(); }
  std::size_t J() const { return J_; }
  std::size_t n_grid() const { return n_; }
  double lambda() const { return triple_.lambda; }
  const std::vector<double>& nu() const { return triple_.nu; }
  const std::vector<double>& h() const { return triple_.h; }

  /// out += scale * M_j f / lambda; j = J+1 is the remainder.
  void add_level_branch(std::size_t j, const double* f, double* out, double scale = 1.0) const;
  void add_level_branch_adjoint(std::size_t j, const double* v, double* out, double scale = 1.0) const;

  /// Stationary level content e_k = sum_{j>=k} M_j h / lambda, k = 1..J+1 (e_1 = h).
  const std::vector<double>& content(std::size_t k) const { return e_[k - 1]; }
  double level_mass(std::size_t k) const;
  /// sum_{k>K} nu(e_k), including the analytic deep tail. +inf when the measure is infinite.
  double mass_beyond(std::size_t K) const;
  /// Kac sum over all levels.
  double M1() const { return mass_beyond(0); }
  /// p_j = nu(M_j h)/lambda for j = 1..J.
  std::vector<double> return_law() const;

  /// Pairing row nu_i * chi_i for the hat projection of [a,b].
  std::vector<double> indicator_row(double a, double b) const;
  /// Pairing row nu_i * g(G_l(t_i)) for a function g on [0,1].
  std::vector<double> function_row(std::size_t l, const std::function<double(double)>& g) const;

  /// Level-1 content psi_0..psi_n for each column.
  std::vector<std::vector<std::vector<double>>> evolve(const std::vector<LevelContent>& cols,
                                                       std::size_t n_max) const;
  /// Content on level l at time n, recovered from the level-1 sequence (needs psi up to n+l-1).
  std::vector<double> level_at(const std::vector<std::vector<double>>& psi, std::size_t l, std::size_t n) const;
  /// P(n) = pairing of the time-n content with obs, for n = 0..n_max.
  std::vector<double> pair(const LevelContent& c, const std::vector<std::vector<double>>& psi,
                           const LevelObservable& obs, std::size_t n_max) const;
  /// Pairing of the stationary content with obs.
  double stationary_pairing(const LevelObservable& obs) const;

private:
  InducedOperator op_;
  EigenTriple triple_;
  std::size_t J_;
  std::size_t n_;
  std::vector<std::vector<double>> e_;
  std::vector<double> suffix_mass_;  // suffix_mass_[k] = sum_{k' > k, k' <= J+1} nu(e_k'), k = 0..J+1
  double deep_beyond_J1_ = 0.0;      // sum over levels > J+1
  double nu_omega_ = 0.0;
};

}  // namespace ilab
