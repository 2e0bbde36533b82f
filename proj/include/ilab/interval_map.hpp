#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ilab {

/// LSV-type map: F(x) = x(1 + r x^s) on [0,q], F(x) = 2x - 1 on (q,1].
struct MapModel {
  double s = 1.0;
  double r = 2.0;
  double q = 0.5;
  std::string kind = "lsv";
};

MapModel make_lsv(double s);
/// Parses `lsv:s=<v>`.
MapModel parse_map_spec(const std::string& spec);
std::string map_spec_string(const MapModel& m);

struct MapEval {
  double F = 0.0;
  double dF = 0.0;
};
MapEval map_apply_deriv(const MapModel& m, double x);

/// F_branch^{-1} evaluated at y. Branch 0 maps into [0,q], branch 1 into [q,1].
double inverse_branch(const MapModel& m, int branch, double y);
/// Derivative of the inverse branch at y.
double inverse_branch_deriv(const MapModel& m, int branch, double y);

struct Passage {
  std::size_t tau = 0;
  bool overflow = false;
};
Passage first_passage(const MapModel& m, double x, std::size_t cap = 1000000);

/// x[0] = 1, x[n] = F_0(x[n-1]); len[n] = |A_n| = x[n-1] - x[n] computed without cancellation.
struct BranchGeometry {
  std::vector<double> x;
  std::vector<double> len;
  std::size_t n_max = 0;
};
BranchGeometry level_sets(const MapModel& m, std::size_t n_max);
void write_geometry_csv(std::ostream& out, const BranchGeometry& g);

struct InducedEval {
  double G = 0.0;
  double dG = 0.0;
  std::size_t tau = 0;
  bool overflow = false;
};
InducedEval induced_apply(const MapModel& m, double x, std::size_t cap = 1000000);

struct BranchPoint {
  double x = 0.0;
  double dx = 0.0;
};
/// G_k(y) = F_0^{k-1}(F_1(y)) and its derivative.
BranchPoint induced_inverse_branch(const MapModel& m, std::size_t k, double y);

/// Sup over sampled pairs of |log G'(x) - log G'(y)| for x, y in a common induced
/// cylinder of depth ell+1, for ell = 0..ell_max. Symbols are drawn from 1..k_cut.
std::vector<double> distortion_check(const MapModel& m, std::size_t ell_max, std::size_t n_samples,
                                     std::uint64_t seed, std::size_t k_cut = 20);

/// omega_j = 1 iff F^j(x) > q.
std::vector<int> coding(const MapModel& m, double x, std::size_t n);

}  // namespace ilab
