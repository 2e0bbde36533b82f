#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ilab/interval_map.hpp"

namespace ilab {

struct ZetaConfig {
  std::size_t N = 20;  ///< induced symbols 1..N
  std::size_t L = 10;  ///< max induced period
  double z = 0.5;
  double w = 1.0;
  double fp_tol = 1e-13;
  /// Words whose weight bound prod z^k sup G_k' falls below this are skipped; 0 enumerates all.
  double prune = 0.0;
  /// Cap on visited words (prefixes included).
  std::size_t guard = 10000000;
  /// Markov mode: weight of a word is prod z^k p_k with p given here (p[k-1] = p_k).
  std::optional<std::vector<double>> markov_p;
};

struct PartitionTerm {
  double xi = 0.0;
  std::size_t words = 0;         ///< leaves evaluated
  double pruned_bound = 0.0;     ///< upper bound on the weight of skipped words
};

/// Xi_ell(z): sum over words k_1..k_ell in {1..N}^ell of z^{sum k} times the derivative of
/// G_{k_1} o ... o G_{k_ell} at its fixed point.
PartitionTerm grand_partition(const MapModel& m, const ZetaConfig& cfg, std::size_t ell);

struct PartitionTable {
  std::vector<double> xi;  ///< xi[ell-1] = Xi_ell(z)
  std::vector<double> pruned_bound;
};
PartitionTable partition_table(const MapModel& m, const ZetaConfig& cfg);
void write_partition_csv(std::ostream& out, const PartitionTable& t);

struct Zeta2 {
  double log_value = 0.0;  ///< sum_{ell<=L} w^ell Xi_ell / ell
  double value = 1.0;
  double remainder = 0.0;  ///< geometric estimate of the neglected log terms
};
/// Throws DomainError when w * max_ell Xi_ell^{1/ell} >= 1.
Zeta2 zeta2_eval(const PartitionTable& t, double w);
Zeta2 zeta2_eval(const MapModel& m, const ZetaConfig& cfg);

/// Q_n = 1 + sum over binary period-n words other than 0^n of 1/|(F^n)'| at the periodic point.
std::vector<double> direct_q(const MapModel& m, std::size_t n_max, double fp_tol = 1e-13);

struct ZetaConsistency {
  std::vector<double> q;          ///< Q_1..Q_nmax
  PartitionTable table;
  double log_zeta2 = 0.0;         ///< log zeta_2(1, z)
  double log_zeta_direct = 0.0;   ///< sum_n z^n Q_n / n
  double log_fixed = 0.0;         ///< log 1/(1-z), the orbit 0^infinity
  double identity_gap = 0.0;      ///< log_zeta2 - (log_zeta_direct - log_fixed)
  double zeta2_remainder = 0.0;
  double direct_remainder = 0.0;
  double log_lambda = 0.0;        ///< log lambda_{z,N} from the induced operator
  std::vector<double> xi_gap;     ///< |(1/ell) log Xi_ell - log lambda| per ell
};
ZetaConsistency zeta_consistency(const MapModel& m, const ZetaConfig& cfg, std::size_t n_max,
                                 std::size_t n_grid = 1024);
void write_consistency_report(std::ostream& out, const ZetaConsistency& r);

}  // namespace ilab
