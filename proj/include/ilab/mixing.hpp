#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ilab/interval_map.hpp"
#include "ilab/tower.hpp"

namespace ilab {

/// Finite union of disjoint subintervals of [0,1] bounded away from 0.
struct SetSpec {
  std::vector<std::pair<double, double>> intervals;
  /// Smallest L with the set inside [x_L, 1]; filled by validate_set.
  std::size_t membership_depth = 0;
};

/// Parses `intervals:a-b,c-d`.
SetSpec parse_set_spec(const std::string& spec);
/// Checks disjointness and positive length, and computes the membership depth.
/// Throws ValidationError for sets that touch the indifferent fixed point.
void validate_set(SetSpec& E, const MapModel& m, std::size_t max_depth = 10000);

struct CorrelationSeries {
  std::string kind;
  std::vector<std::size_t> n;
  std::vector<double> values;
  std::vector<double> ci;
  std::map<std::string, std::string> meta;
};
void write_correlation_csv(std::ostream& out, const CorrelationSeries& s);

/// u_n = mu(A_1 and T^{-n} A_1) for n = 0..n_max; meta carries M1 when finite.
CorrelationSeries return_density(const Tower& tw, std::size_t n_max);
/// v_n = M_1 u_n - 1.
CorrelationSeries v_from_u(const CorrelationSeries& u, double M1);

struct SetRates {
  std::vector<double> joint;  ///< mu(E and T^{-n} E)
  std::vector<double> sigma;  ///< joint / mu(E)^2
  std::vector<double> mu;     ///< mixing rate, finite measure only (empty otherwise)
  double measure = 0.0;       ///< mu(E)
};
SetRates set_rates(const Tower& tw, const SetSpec& E, std::size_t n_max);

struct ComplementCheck {
  std::vector<double> lhs;  ///< mu^(E and T^{-n}E) - mu^(E)^2
  std::vector<double> rhs;  ///< same for the complement
  double max_abs_diff = 0.0;
};
/// Computes both sides independently; the complement carries content on every level.
ComplementCheck complement_identity(const Tower& tw, const SetSpec& E, std::size_t n_max);

/// Covariance of f and g o F^n under the normalized invariant measure, from the tower.
/// Observables are resolved on the first obs_levels levels and frozen at g(0) beyond.
CorrelationSeries correlation_operator(const Tower& tw, const std::function<double(double)>& f,
                                       const std::function<double(double)>& g, std::size_t n_max,
                                       std::size_t obs_levels = 200);
/// Birkhoff estimate along one seeded orbit; finite measure only.
CorrelationSeries correlation_orbit(const MapModel& m, const std::function<double(double)>& f,
                                    const std::function<double(double)>& g, std::size_t n_max,
                                    std::size_t orbit_len, std::uint64_t seed, std::size_t burn_in = 100000);

/// Sum over pairs of depth-ell cylinders E, F of |mu^(E and T^{-n}F) - mu^(E) mu^(F)|.
CorrelationSeries cylinder_wb_sum(const Tower& tw, std::size_t ell, const std::vector<std::size_t>& n_list);

struct WanderingRelation {
  std::vector<double> r;      ///< r_n for n = 1..n_max (index n-1)
  std::vector<double> sum_u;  ///< sum_{k<=n} u_k
  std::vector<double> sum_w;  ///< sum_{k<=n} mu(tau = k)
};
/// Infinite-measure diagnostic r_n = (sum_{k<=n} sigma_k(A_1)) (sum_{k<=n} mu(tau=k)) / n.
WanderingRelation wandering_relation(const Tower& tw, std::size_t n_max);

/// Observable specs: `pow:<a>`, `cos:<k>`, `indicator:<setspec>`.
std::function<double(double)> parse_observable(const std::string& spec);

}  // namespace ilab
