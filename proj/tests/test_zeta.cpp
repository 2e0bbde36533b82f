#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ilab/error.hpp"
#include "ilab/interval_map.hpp"
#include "ilab/numeric.hpp"
#include "ilab/transfer.hpp"
#include "ilab/zeta.hpp"

using namespace ilab;

namespace {

// Fixed point of the inverse-branch composition H_{k1} o ... o H_{kl} by bisection on x - H(x),
// returning the product of inverse-branch derivatives along the orbit.
double periodic_weight(const MapModel& m, const std::vector<std::size_t>& word) {
  auto H = [&](double x, double* d) {
    double dprod = 1.0;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      auto b = induced_inverse_branch(m, *it, x);
      dprod *= b.dx;
      x = b.x;
    }
    if (d) *d = dprod;
    return x;
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid - H(mid, nullptr) < 0.0) lo = mid; else hi = mid;
  }
  double d = 0.0;
  H(0.5 * (lo + hi), &d);
  return d;
}

}  // namespace

TEST_CASE("zeta: one- and two-symbol words against a bisection oracle") {
  MapModel m = make_lsv(1.0);
  ZetaConfig cfg;
  cfg.N = 10;
  cfg.z = 0.7;
  CompensatedSum x1, x2;
  for (std::size_t a = 1; a <= 10; ++a) {
    x1.add(std::pow(0.7, a) * periodic_weight(m, {a}));
    for (std::size_t b = 1; b <= 10; ++b) x2.add(std::pow(0.7, a + b) * periodic_weight(m, {a, b}));
  }
  PartitionTerm t1 = grand_partition(m, cfg, 1), t2 = grand_partition(m, cfg, 2);
  CHECK(t1.xi == doctest::Approx(x1.value()).epsilon(1e-11));
  CHECK(t2.xi == doctest::Approx(x2.value()).epsilon(1e-11));
  CHECK(t1.words == 10);
  CHECK(t2.words == 100);
  CHECK(t2.pruned_bound == 0.0);

  // G_1 is affine with slope 2, so the z^1 coefficient is 1/2
  ZetaConfig one;
  one.N = 1;
  one.z = 0.3;
  CHECK(grand_partition(m, one, 1).xi == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("zeta: periodic points of composed inverse branches are unique") {
  SplitMix64 rng(5);
  for (double s : {0.5, 1.0, 2.0}) {
    MapModel m = make_lsv(s);
    for (int t = 0; t < 50; ++t) {
      std::vector<std::size_t> word(1 + rng.next() % 5);
      for (auto& k : word) k = 1 + rng.next() % 20;
      auto iterate = [&](double x) {
        for (int it = 0; it < 2000; ++it)
          for (auto k = word.rbegin(); k != word.rend(); ++k) x = induced_inverse_branch(m, *k, x).x;
        return x;
      };
      CHECK(std::abs(iterate(0.1) - iterate(0.9)) <= 10 * 1e-13);
    }
  }
  // the enumerated weight for each word matches the bisection fixed point
  MapModel m = make_lsv(2.0);
  ZetaConfig cfg;
  cfg.N = 3;
  cfg.z = 1.0;
  CompensatedSum x1;
  for (std::size_t a = 1; a <= 3; ++a) x1.add(periodic_weight(m, {a}));
  CHECK(grand_partition(m, cfg, 1).xi == doctest::Approx(x1.value()).epsilon(1e-11));
}

TEST_CASE("zeta: Markov mode factorizes") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> p(6);
    double s = 0.0;
    for (auto& v : p) s += v = rng.uniform();
    for (auto& v : p) v /= s;
    ZetaConfig cfg;
    cfg.N = 6;
    cfg.L = 5;
    cfg.z = 0.2 + 0.7 * rng.uniform();
    cfg.markov_p = p;
    double P = 0.0;
    for (std::size_t k = 1; k <= 6; ++k) P += std::pow(cfg.z, k) * p[k - 1];
    PartitionTable t = partition_table(make_lsv(1.0), cfg);
    for (std::size_t l = 1; l <= 5; ++l) CHECK(t.xi[l - 1] == doctest::Approx(std::pow(P, l)).epsilon(1e-10));
    double w = 0.9;
    Zeta2 zt = zeta2_eval(t, w);
    double closed = 0.0;
    for (std::size_t l = 1; l <= 5; ++l) closed += std::pow(w * P, l) / l;
    CHECK(zt.log_value == doctest::Approx(closed).epsilon(1e-12));
    // the remainder estimate covers the rest of -log(1 - wP)
    CHECK(std::abs(-std::log(1.0 - w * P) - zt.log_value) <= zt.remainder * (1 + 1e-9) + 1e-15);
  }
}

TEST_CASE("zeta2 in w") {
  MapModel m = make_lsv(1.0);
  ZetaConfig cfg;
  cfg.N = 8;
  cfg.L = 4;
  cfg.z = 0.5;
  PartitionTable t = partition_table(m, cfg);
  CHECK(zeta2_eval(t, 0.0).value == 1.0);
  double prev = 1.0;
  for (double w = 0.1; w < 1.5; w += 0.1) {
    double v = zeta2_eval(t, w).value;
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(zeta2_eval(t, 1e6), DomainError);
  ZetaConfig z0 = cfg;
  z0.z = 0.0;
  CHECK(zeta2_eval(m, z0).value == 1.0);
  // Xi_ell nondecreasing in z
  PartitionTable prev_t = partition_table(m, z0);
  for (double z = 0.2; z <= 1.0; z += 0.2) {
    ZetaConfig cz = cfg;
    cz.z = z;
    PartitionTable tz = partition_table(m, cz);
    for (std::size_t l = 0; l < tz.xi.size(); ++l) {
      CHECK(tz.xi[l] > 0.0);
      CHECK(tz.xi[l] >= prev_t.xi[l]);
    }
    prev_t = tz;
  }
  std::stringstream ss;
  write_partition_csv(ss, t);
  CHECK(ss.str().rfind("ell,xi,pruned_bound\n", 0) == 0);
}

TEST_CASE("direct periodic sums") {
  MapModel m = make_lsv(1.0);
  auto q = direct_q(m, 10);
  CHECK(q[0] == doctest::Approx(1.5).epsilon(1e-14));
  for (double v : q) CHECK(v > 1.0);
  // for the doubling map (s -> 0) every nontrivial word of length n has weight 2^{-n}
  auto q0 = direct_q(make_lsv(1e-9), 8);
  for (std::size_t n = 1; n <= 8; ++n) {
    double want = 1.0 + (std::pow(2.0, n) - 1.0) / std::pow(2.0, n);
    CHECK(q0[n - 1] == doctest::Approx(want).epsilon(1e-6));
  }
  CHECK_THROWS_AS(direct_q(m, 30), ResourceError);
}

TEST_CASE("zeta consistency identity") {
  MapModel m = make_lsv(1.0);
  ZetaConfig cfg;
  cfg.N = 12;
  cfg.L = 6;
  cfg.z = 0.5;
  cfg.prune = 1e-10;
  ZetaConsistency r = zeta_consistency(m, cfg, 16, 256);
  CHECK(std::abs(r.identity_gap) < 1e-3);
  CHECK(r.log_fixed == doctest::Approx(std::log(2.0)));
  std::stringstream ss;
  write_consistency_report(ss, r);
  CHECK(ss.str().find("identity_gap") != std::string::npos);

  // more induced periods shrink the gap where truncation in ell dominates
  ZetaConfig hi = cfg;
  hi.z = 0.8;
  hi.prune = 1e-8;
  hi.L = 3;
  double g3 = std::abs(zeta_consistency(m, hi, 16, 256).identity_gap);
  hi.L = 6;
  double g6 = std::abs(zeta_consistency(m, hi, 16, 256).identity_gap);
  CHECK(g6 < g3);
  // (1/ell) log Xi_ell(0.8) approaches log lambda_{0.8,N}
  ZetaConfig xc = hi;
  xc.L = 6;
  ZetaConsistency rx = zeta_consistency(m, xc, 8, 1024);
  CHECK(rx.xi_gap[5] < rx.xi_gap[2]);
  ZetaConfig bad = cfg;
  bad.z = 0.95;
  CHECK_THROWS_AS(zeta_consistency(m, bad, 10, 128), DomainError);
}

TEST_CASE("Xi_ell^{1/ell} approaches the induced eigenvalue") {
  MapModel m = make_lsv(1.0);
  ZetaConfig cfg;
  cfg.N = 8;
  cfg.L = 5;
  cfg.z = 1.0;
  PartitionTable t = partition_table(m, cfg);
  double lam = leading_triple(InducedOperator(m, 8, 1024), 1.0).lambda;
  CHECK(std::abs(std::pow(t.xi[4], 0.2) / lam - 1.0) < 0.01);
  // already a decent approximation at ell = 3, better at ell = 5
  CHECK(std::abs(std::pow(t.xi[4], 0.2) - lam) < std::abs(std::pow(t.xi[2], 1.0 / 3.0) - lam));
}

TEST_CASE("zeta guards") {
  MapModel m = make_lsv(1.0);
  ZetaConfig cfg;
  cfg.N = 20;
  cfg.L = 6;
  cfg.guard = 1000;
  CHECK_THROWS_AS(grand_partition(m, cfg, 6), ResourceError);
  ZetaConfig bad;
  bad.N = 0;
  CHECK_THROWS_AS(grand_partition(m, bad, 1), ValidationError);
  // pruning reports what it skipped
  ZetaConfig pr;
  pr.N = 12;
  pr.z = 0.9;
  pr.prune = 1e-6;
  PartitionTerm a = grand_partition(m, pr, 4);
  pr.prune = 0.0;
  PartitionTerm b = grand_partition(m, pr, 4);
  CHECK(a.words < b.words);
  CHECK(b.xi - a.xi >= 0.0);
  CHECK(b.xi - a.xi <= a.pruned_bound);
}
