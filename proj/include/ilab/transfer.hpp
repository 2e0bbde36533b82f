#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "ilab/grid.hpp"
#include "ilab/interval_map.hpp"
#include "ilab/renewal.hpp"

namespace ilab {

/// Coefficients c_k multiplying the branch operators M_k, plus the weight of the
/// optional rank-one remainder that stands in for all branches beyond N.
struct Coeffs {
  std::vector<double> branch;  ///< branch[k-1] multiplies M_k
  double remainder = 0.0;
};

/// Collocation of M_{z,N} f(y) = sum_k z^k G_k'(y) f(G_k(y)) on a uniform grid.
/// Branch k is stored as (cell, w0, w1) per node with G_k' folded into the weights.
class InducedOperator {
public:
  InducedOperator(const MapModel& m, std::size_t N, std::size_t n_grid, bool with_remainder = false);
  /// Piecewise-constant surrogate: weight p_k in place of G_k'(y).
  static InducedOperator markov(const MapModel& m, const std::vector<double>& p, std::size_t n_grid);

  std::size_t N() const { return N_; }
  std::size_t n_grid() const { return n_; }
  bool markov_mode() const { return markov_; }
  bool has_remainder() const { return with_remainder_; }
  const MapModel& map() const { return map_; }

  /// c_k = k^order z^k; remainder weight set only at order 0.
  Coeffs power_coeffs(double z, int order = 0) const;

  /// out = sum_k c_k M_k f (+ remainder).
  void apply(const Coeffs& c, const std::vector<double>& f, std::vector<double>& out) const;
  /// out = sum_k c_k M_k^T v, the adjoint acting on node-weight vectors.
  void apply_adjoint(const Coeffs& c, const std::vector<double>& v, std::vector<double>& out) const;
  /// out += scale * M_k f for a single branch k in 1..N.
  void add_branch(std::size_t k, const double* f, double* out, double scale = 1.0) const;
  void add_branch_adjoint(std::size_t k, const double* v, double* out, double scale = 1.0) const;
  /// out += scale * R f; R f = omega * (row . f).
  void add_remainder(const double* f, double* out, double scale = 1.0) const;
  void add_remainder_adjoint(const double* v, double* out, double scale = 1.0) const;

  /// G_k(y_i), recovered from the stored cell and weights.
  double branch_point(std::size_t k, std::size_t i) const;
  /// x_k = G_k(0) for k = 0..N (x_0 = 1).
  const std::vector<double>& level_points() const { return xk_; }
  const std::vector<double>& remainder_omega() const { return omega_; }
  const std::vector<double>& remainder_row() const { return rem_row_; }

private:
  InducedOperator() = default;
  void build_remainder();

  MapModel map_;
  std::size_t N_ = 0;
  std::size_t n_ = 0;
  bool markov_ = false;
  bool with_remainder_ = false;
  std::vector<std::int32_t> idx_;  // N x n
  std::vector<double> w0_, w1_;    // N x n
  std::vector<double> xk_;
  std::vector<double> omega_, rem_row_;
};

struct EigenTriple {
  double lambda = 0.0;
  std::vector<double> h;   ///< eigenfunction at nodes, scaled so nu . h = 1
  std::vector<double> nu;  ///< node weights of the eigen-measure, summing to 1
  double z = 1.0;
  std::size_t N = 0;
  std::size_t n_grid = 0;
  double residual = 0.0;
  double nu_h = 1.0;
  std::size_t iterations = 0;
};

/// Power iteration on h, adjoint iteration on nu, Rayleigh quotient for lambda.
EigenTriple leading_triple(const InducedOperator& op, const Coeffs& c, double tol = 1e-13,
                           std::size_t max_iter = 20000);
EigenTriple leading_triple(const InducedOperator& op, double z, double tol = 1e-13,
                           std::size_t max_iter = 20000);
void write_triple_csv(std::ostream& out, const EigenTriple& t);

struct PressureResult {
  double P1 = 0.0;        ///< log lambda at z = 1
  double dP = 0.0;        ///< (zD)P at 1, Richardson-extrapolated one-sided differences
  double dP_exact = 0.0;  ///< nu . M^{(1)} h / lambda
  double d2P = std::numeric_limits<double>::quiet_NaN();
  double M1 = 0.0;        ///< sum_{k<=N} k p_k from cylinder_measures
  double deficit = 0.0;   ///< 1 - sum_{k<=N} p_k
  int order = 1;
};

/// Finite-difference pressure derivatives on the stencil z_j = exp(-j*fd_step).
PressureResult fd_pressure(const InducedOperator& op, double fd_step, int order, double tol = 1e-13);
/// LSV wrapper; refuses derivative orders beyond the ergodic degree 1/s - 1.
PressureResult pressure_and_derivatives(const MapModel& m, std::size_t N, std::size_t n_grid,
                                        double fd_step = 1e-3, int order = 1);

struct CylinderMeasures {
  TailLaw law;  ///< p_1..p_{n_max}, not normalized
  double total = 0.0;
  double deficit = 0.0;
};
/// p_n = integral over A_n of h against nu, with nu read as a density on the grid.
CylinderMeasures cylinder_measures(const EigenTriple& t, const MapModel& m, std::size_t n_max);

/// e(x) = sum_{n<=N_e} h(F_0^n x) (F_0^n)'(x).
double sigma_finite_density(const EigenTriple& t, const MapModel& m, std::size_t N_e, double x);

struct OriginalOpResult {
  std::vector<double> L, L0, L1;
};
/// (L_i f)(y) = F_i'(y) f(F_i(y)) at the grid nodes.
OriginalOpResult original_op_apply(const MapModel& m, const GridFn& f);

/// Sup over interior nodes of (1 - M_{z,N})(1 - z L_0) f - (1 - z L) f, with every
/// composition evaluated pointwise on the interpolant of f.
double identity_check(const MapModel& m, double z, const GridFn& f, std::size_t N);

/// rho(D_eta) / (composed inverse-branch derivative at y = 1/2) for each induced word.
std::vector<double> gibbs_ratios(const EigenTriple& t, const MapModel& m,
                                 const std::vector<std::vector<std::size_t>>& words);
/// mu(A_n) / |A_n| for n in [n_lo, n_hi], with mu(A_n) = rho(D_{n-1}) from the cylinder law.
std::vector<double> weak_gibbs_trace(const TailLaw& p, const MapModel& m, std::size_t n_lo, std::size_t n_hi);

struct BatchMeans {
  double mean = 0.0;
  double sigma2 = 0.0;
  double stderr_sigma2 = 0.0;
  std::size_t steps = 0;
};
/// Mean and asymptotic variance of the return time along a seeded induced orbit.
BatchMeans induced_orbit_variance(const MapModel& m, std::size_t steps, std::size_t batches,
                                  std::uint64_t seed, std::size_t burn_in = 100000);

}  // namespace ilab
