#include "ilab/zeta.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"
#include "ilab/parallel.hpp"
#include "ilab/transfer.hpp"

namespace ilab {

namespace {

struct WordState {
  const MapModel* m;
  const ZetaConfig* cfg;
  std::size_t ell;
  std::vector<double> factor;  // z^k sup G_k' (LSV) or z^k p_k (Markov)
  double max_factor_sum;       // sum_k factor_k, bounds the continuation of a pruned prefix
  std::atomic<std::size_t>* visited;
};

// Derivative of G_{w_0} o ... o G_{w_{l-1}} at its fixed point.
double composed_weight(const MapModel& m, const std::vector<std::size_t>& w, double tol) {
  double x = 0.5;
  for (int it = 0; it < 500; ++it) {
    double y = x, d = 1.0;
    for (std::size_t i = w.size(); i-- > 0;) {
      BranchPoint b = induced_inverse_branch(m, w[i], y);
      y = b.x;
      d *= b.dx;
    }
    if (std::abs(y - x) <= tol) return d;
    x = y;
  }
  throw NumericalError("induced periodic point did not converge", 0.0);
}

void enumerate(const WordState& st, std::vector<std::size_t>& word, double bound, double zpow,
               PartitionTerm& acc) {
  if (st.visited->fetch_add(1, std::memory_order_relaxed) + 1 > st.cfg->guard)
    throw ResourceError("zeta word enumeration exceeds the guard");
  if (word.size() == st.ell) {
    ++acc.words;
    if (st.cfg->markov_p)
      acc.xi += bound;
    else
      acc.xi += zpow * composed_weight(*st.m, word, st.cfg->fp_tol);
    return;
  }
  const std::size_t remaining = st.ell - word.size() - 1;
  for (std::size_t k = 1; k <= st.cfg->N; ++k) {
    double b = bound * st.factor[k - 1];
    if (b == 0.0) continue;
    if (b < st.cfg->prune) {
      acc.pruned_bound += b * std::pow(st.max_factor_sum, static_cast<double>(remaining));
      continue;
    }
    word.push_back(k);
    enumerate(st, word, b, zpow * std::pow(st.cfg->z, static_cast<double>(k)), acc);
    word.pop_back();
  }
}

}  // namespace

PartitionTerm grand_partition(const MapModel& m, const ZetaConfig& cfg, std::size_t ell) {
  if (ell < 1 || ell > cfg.L) throw ValidationError("grand_partition: ell must lie in 1..L");
  if (cfg.N < 1) throw ValidationError("N must be at least 1");
  if (!(cfg.z >= 0.0 && cfg.z <= 1.0)) throw DomainError("z must lie in [0,1]");
  if (cfg.prune == 0.0 && std::pow(static_cast<double>(cfg.N), static_cast<double>(ell)) > static_cast<double>(cfg.guard))
    throw ResourceError("N^ell exceeds the enumeration guard");
  WordState st{&m, &cfg, ell, {}, 0.0, nullptr};
  st.factor.resize(cfg.N);
  for (std::size_t k = 1; k <= cfg.N; ++k) {
    double zk = std::pow(cfg.z, static_cast<double>(k));
    if (cfg.markov_p) {
      const auto& p = *cfg.markov_p;
      st.factor[k - 1] = zk * (k <= p.size() ? p[k - 1] : 0.0);
    } else {
      // (F_0^{-1})' decreases, so G_k' is largest at y = 0
      st.factor[k - 1] = zk * induced_inverse_branch(m, k, 0.0).dx;
    }
    st.max_factor_sum += st.factor[k - 1];
  }
  std::atomic<std::size_t> visited{0};
  st.visited = &visited;

  std::vector<PartitionTerm> parts(cfg.N);
  parallel_for(1, cfg.N + 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      double b = st.factor[k - 1];
      if (b == 0.0) continue;
      if (b < cfg.prune) {
        parts[k - 1].pruned_bound += b * std::pow(st.max_factor_sum, static_cast<double>(ell - 1));
        continue;
      }
      std::vector<std::size_t> word{k};
      enumerate(st, word, b, std::pow(cfg.z, static_cast<double>(k)), parts[k - 1]);
    }
  });
  PartitionTerm out;
  CompensatedSum xi, pb;
  for (const auto& p : parts) {
    xi.add(p.xi);
    pb.add(p.pruned_bound);
    out.words += p.words;
  }
  out.xi = xi.value();
  out.pruned_bound = pb.value();
  return out;
}

PartitionTable partition_table(const MapModel& m, const ZetaConfig& cfg) {
  PartitionTable t;
  for (std::size_t ell = 1; ell <= cfg.L; ++ell) {
    PartitionTerm p = grand_partition(m, cfg, ell);
    t.xi.push_back(p.xi);
    t.pruned_bound.push_back(p.pruned_bound);
  }
  return t;
}

void write_partition_csv(std::ostream& out, const PartitionTable& t) {
  out << "ell,xi,pruned_bound\n" << std::setprecision(17);
  for (std::size_t i = 0; i < t.xi.size(); ++i) out << i + 1 << ',' << t.xi[i] << ',' << t.pruned_bound[i] << '\n';
}

Zeta2 zeta2_eval(const PartitionTable& t, double w) {
  if (w < 0.0) throw DomainError("w must be nonnegative");
  Zeta2 r;
  if (w == 0.0 || t.xi.empty()) return r;
  double growth = 0.0;
  for (std::size_t i = 0; i < t.xi.size(); ++i)
    if (t.xi[i] > 0.0) growth = std::max(growth, std::pow(t.xi[i], 1.0 / static_cast<double>(i + 1)));
  if (w * growth >= 1.0) throw DomainError("zeta_2 series diverges: w * Xi_ell^{1/ell} >= 1");
  CompensatedSum s;
  double wl = 1.0;
  for (std::size_t i = 0; i < t.xi.size(); ++i) {
    wl *= w;
    s.add(wl * t.xi[i] / static_cast<double>(i + 1));
  }
  r.log_value = s.value();
  r.value = std::exp(r.log_value);
  const std::size_t L = t.xi.size();
  double rho = w * growth;
  if (L >= 2 && t.xi[L - 2] > 0.0) rho = std::max(rho, w * t.xi[L - 1] / t.xi[L - 2]);
  r.remainder = wl * t.xi[L - 1] * rho / (static_cast<double>(L + 1) * (1.0 - rho));
  return r;
}

Zeta2 zeta2_eval(const MapModel& m, const ZetaConfig& cfg) {
  if (cfg.w == 0.0) return Zeta2{};
  return zeta2_eval(partition_table(m, cfg), cfg.w);
}

std::vector<double> direct_q(const MapModel& m, std::size_t n_max, double fp_tol) {
  if (n_max < 1 || n_max > 24) throw ResourceError("direct Q_n supports 1 <= n <= 24");
  std::vector<double> q(n_max, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const std::uint64_t W = std::uint64_t{1} << n;
    std::vector<double> part(W, 0.0);
    parallel_for(1, W, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t word = lo; word < hi; ++word) {
        // symbol j = bit (n-1-j); the point has coding omega_0..omega_{n-1}
        // Newton on x - H(x) for the inverse-branch composition H, falling back to x = H(x)
        double x = 0.5, d = 1.0;
        bool done = false;
        for (int it = 0; it < 500 && !done; ++it) {
          double y = x;
          d = 1.0;
          for (std::size_t j = n; j-- > 0;) {
            int b = static_cast<int>((word >> (n - 1 - j)) & 1U);
            y = inverse_branch(m, b, y);
            d /= map_apply_deriv(m, y).dF;
          }
          done = std::abs(y - x) <= fp_tol;
          double xn = x - (x - y) / (1.0 - d);
          x = (d < 1.0 && xn >= 0.0 && xn <= 1.0) ? xn : y;
        }
        if (!done) throw NumericalError("periodic point of F^n did not converge", 0.0);
        part[word] = d;
      }
    });
    CompensatedSum s;
    s.add(1.0);
    for (std::uint64_t w = 1; w < W; ++w) s.add(part[w]);
    q[n - 1] = s.value();
  }
  return q;
}

ZetaConsistency zeta_consistency(const MapModel& m, const ZetaConfig& cfg, std::size_t n_max,
                                 std::size_t n_grid) {
  if (!(cfg.z > 0.0 && cfg.z <= 0.9)) throw DomainError("consistency check needs 0 < z <= 0.9");
  ZetaConsistency r;
  r.q = direct_q(m, n_max, cfg.fp_tol);
  r.table = partition_table(m, cfg);
  Zeta2 z2 = zeta2_eval(r.table, 1.0);
  r.log_zeta2 = z2.log_value;
  r.zeta2_remainder = z2.remainder;
  CompensatedSum s;
  double zn = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    zn *= cfg.z;
    s.add(zn * r.q[n - 1] / static_cast<double>(n));
  }
  r.log_zeta_direct = s.value();
  r.log_fixed = -std::log1p(-cfg.z);
  // Q_n stays bounded when F has a finite invariant density tail; use the last term geometrically
  r.direct_remainder = zn * cfg.z * r.q[n_max - 1] / (static_cast<double>(n_max + 1) * (1.0 - cfg.z));
  r.identity_gap = r.log_zeta2 - (r.log_zeta_direct - r.log_fixed);

  InducedOperator op(m, cfg.N, n_grid);
  EigenTriple t = leading_triple(op, cfg.z);
  r.log_lambda = std::log(t.lambda);
  for (std::size_t i = 0; i < r.table.xi.size(); ++i)
    r.xi_gap.push_back(std::abs(std::log(r.table.xi[i]) / static_cast<double>(i + 1) - r.log_lambda));
  return r;
}

void write_consistency_report(std::ostream& out, const ZetaConsistency& r) {
  out << std::setprecision(15);
  out << "log_zeta2," << r.log_zeta2 << '\n';
  out << "log_zeta_direct," << r.log_zeta_direct << '\n';
  out << "log_fixed_point," << r.log_fixed << '\n';
  out << "identity_gap," << r.identity_gap << '\n';
  out << "zeta2_remainder," << r.zeta2_remainder << '\n';
  out << "direct_remainder," << r.direct_remainder << '\n';
  out << "log_lambda," << r.log_lambda << '\n';
  out << "ell,xi,xi_gap\n";
  for (std::size_t i = 0; i < r.table.xi.size(); ++i) out << i + 1 << ',' << r.table.xi[i] << ',' << r.xi_gap[i] << '\n';
  out << "n,Q_n\n";
  for (std::size_t n = 0; n < r.q.size(); ++n) out << n + 1 << ',' << r.q[n] << '\n';
}

}  // namespace ilab
