#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ilab/error.hpp"
#include "ilab/numeric.hpp"
#include "ilab/renewal.hpp"

using namespace ilab;

namespace {

// Random normalized law with K atoms.
TailLaw random_law(SplitMix64& rng, std::size_t K) {
  std::vector<double> p(K);
  double s = 0.0;
  for (auto& v : p) {
    v = rng.uniform() * (rng.uniform() < 0.3 ? 0.0 : 1.0);
    s += v;
  }
  if (s == 0.0) {
    p[0] = 1.0;
    s = 1.0;
  }
  for (auto& v : p) v /= s;
  return make_law(p);
}

// Textbook recurrence a_n = sum_{j=1}^n p_j a_{n-j}.
std::vector<double> naive_renewal(const TailLaw& law, std::size_t n) {
  std::vector<double> a(n + 1, 0.0);
  a[0] = 1.0;
  for (std::size_t m = 1; m <= n; ++m)
    for (std::size_t j = 1; j <= m; ++j) a[m] += law.p(j) * a[m - j];
  return a;
}

}  // namespace

TEST_CASE("renewal: deterministic and two-point laws") {
  auto one = renewal_sequence(make_law({1.0}), 20);
  for (double a : one.a) CHECK(a == doctest::Approx(1.0).epsilon(1e-15));

  auto two = renewal_sequence(parse_tail_spec("uniform2"), 3);
  CHECK(two.a[0] == 1.0);
  CHECK(two.a[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two.a[2] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(two.a[3] == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("renewal: geometric law gives a_n = 1/2") {
  auto seq = renewal_sequence(parse_tail_spec("geometric:q=0.5"), 500);
  CHECK(seq.a[0] == 1.0);
  for (std::size_t n = 1; n <= 500; ++n) CHECK(std::abs(seq.a[n] - 0.5) < 1e-12);
  CHECK(seq.M1 == doctest::Approx(2.0).epsilon(1e-12));
  auto b = b_sequence(seq);
  CHECK(b[0] == doctest::Approx(1.0));
  for (std::size_t n = 1; n <= 500; ++n) CHECK(std::abs(b[n]) < 1e-11);
}

TEST_CASE("renewal: matches the naive recurrence on random laws, with tails") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    TailLaw law = random_law(rng, 1 + rng.next() % 30);
    auto seq = renewal_sequence(law, 300);
    auto ref = naive_renewal(law, 300);
    for (std::size_t n = 0; n <= 300; ++n) CHECK(std::abs(seq.a[n] - ref[n]) < 1e-12);
  }
  TailLaw pw = parse_tail_spec("power:alpha=2.5");
  auto seq = renewal_sequence(pw, 400);
  auto ref = naive_renewal(pw, 400);
  for (std::size_t n = 0; n <= 400; ++n) CHECK(std::abs(seq.a[n] - ref[n]) < 1e-12);
}

TEST_CASE("renewal property: sum_k d_k a_{n-k} = 1 and 0 <= a_n <= 1") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    TailLaw law = random_law(rng, 1 + rng.next() % 100);
    const std::size_t N = 600;
    auto seq = renewal_sequence(law, N);
    auto ts = tail_sums(law, N);
    for (std::size_t n = 0; n <= N; ++n) {
      CompensatedSum s;
      for (std::size_t k = 0; k <= n; ++k) s.add(ts.d[k] * seq.a[n - k]);
      REQUIRE(std::abs(s.value() - 1.0) < 1e-10);
      REQUIRE(seq.a[n] >= -1e-15);
      REQUIRE(seq.a[n] <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("renewal: FFT and direct convolution agree") {
  TailLaw law = parse_tail_spec("power:alpha=1.5");
  const std::size_t N = 1 << 13;
  auto d = renewal_sequence(law, N, ConvolutionMethod::direct);
  auto f = renewal_sequence(law, N, ConvolutionMethod::fft);
  double e = 0.0;
  for (std::size_t n = 0; n <= N; ++n) e = std::max(e, std::abs(d.a[n] - f.a[n]));
  CHECK(e < 1e-10);
}

TEST_CASE("renewal: infinite-mean law decays to 0, finite mean to 1/M1") {
  auto inf = renewal_sequence(parse_tail_spec("power:alpha=1.5"), 20000);
  CHECK(std::isinf(inf.M1));
  CHECK(inf.a[20000] < inf.a[2000]);
  CHECK(inf.a[20000] < 0.05);
  CHECK_THROWS_AS(b_sequence(inf), DomainError);

  auto fin = renewal_sequence(parse_tail_spec("power:alpha=3"), 20000);
  CHECK(std::abs(fin.a[20000] - 1.0 / fin.M1) < 1e-3);
}

TEST_CASE("renewal: invalid laws are rejected") {
  CHECK_THROWS_AS(make_law({0.7, -0.1}), ValidationError);
  CHECK_THROWS_AS(make_law({0.7, 0.6}), ValidationError);
  CHECK_THROWS_AS(make_law({0.5, 0.2}, std::nullopt, true), ValidationError);
  CHECK_NOTHROW(make_law({0.5, 0.2}, std::nullopt, false));
  CHECK_THROWS_AS(parse_tail_spec("geometric:q=1.5"), ValidationError);
}

TEST_CASE("tail sums: partial sums and Kac") {
  auto ts = tail_sums(parse_tail_spec("uniform2"), 4);
  CHECK(ts.d[0] == doctest::Approx(1.0));
  CHECK(ts.d[1] == doctest::Approx(0.5));
  CHECK(ts.d[2] == 0.0);
  CHECK(ts.d[3] == 0.0);

  auto g = tail_sums(parse_tail_spec("geometric:q=0.5"), 30);
  for (std::size_t n = 0; n <= 30; ++n) CHECK(g.d[n] == doctest::Approx(std::pow(2.0, -static_cast<double>(n))).epsilon(1e-12));

  SplitMix64 rng(5);
  for (int t = 0; t < 10; ++t) {
    TailLaw law = random_law(rng, 1 + rng.next() % 40);
    auto s = tail_sums(law, law.K() + 2);
    CompensatedSum sum;
    for (double d : s.d) sum.add(d);
    CHECK(sum.value() == doctest::Approx(first_moment(law)).epsilon(1e-12));
    for (std::size_t n = 1; n < s.d.size(); ++n) {
      CHECK(s.d[n] <= s.d[n - 1] + 1e-15);
      CHECK(s.d1[n] <= s.d1[n - 1] + 1e-15);
    }
  }
}

TEST_CASE("renewal asymptotics: alpha = 3 gives b_n ~ (1/M1) sum_{k>n} d_k") {
  TailLaw law = parse_tail_spec("power:alpha=3");
  const std::size_t n = 10000;
  auto seq = renewal_sequence(law, n);
  auto b = b_sequence(seq);
  auto ts = tail_sums(law, n);
  double ratio = b[n] / (ts.d1[n] / seq.M1);
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.1);
}

TEST_CASE("moments") {
  SplitMix64 rng(9);
  for (int t = 0; t < 5; ++t) CHECK(moment(random_law(rng, 17), 0.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(moment(parse_tail_spec("geometric:q=0.5"), 1.0, 1.0).value == doctest::Approx(2.0).epsilon(1e-12));
  auto m2 = moment(parse_tail_spec("power:alpha=3"), 2.0, 1.0);
  CHECK_FALSE(m2.finite);
  CHECK(moment(parse_tail_spec("power:alpha=3"), 1.5, 1.0).finite);
  // gamma -> M_gamma(1) is nondecreasing
  TailLaw law = parse_tail_spec("power:alpha=4");
  double prev = 0.0;
  for (double g = 0.0; g < 2.9; g += 0.25) {
    double v = moment(law, g, 1.0).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("generating functions") {
  SplitMix64 rng(77);
  TailLaw law = random_law(rng, 25);
  CHECK(gf_eval(law, 0.0).A == doctest::Approx(1.0));
  CHECK(gf_eval(parse_tail_spec("geometric:q=0.5"), 0.5).A == doctest::Approx(1.5).epsilon(1e-12));
  for (double z : {0.3, 0.7, 0.95}) {
    GfValues g = gf_eval(law, z);
    CHECK(std::abs((1.0 - z) * g.D * g.A - 1.0) < 1e-10);
    CHECK(std::abs((1.0 - z) * g.D - (1.0 - g.P)) < 1e-12);
  }
  GfValues gp = gf_eval(parse_tail_spec("power:alpha=3"), 0.7);
  CHECK(std::abs(0.3 * gp.D * gp.A - 1.0) < 1e-10);
  CHECK(gp.B == doctest::Approx(gp.D1 / gp.D));
  CHECK_THROWS_AS(gf_eval(law, 1.0), DomainError);
}

TEST_CASE("ergodic degree") {
  auto d3 = ergodic_degree(parse_tail_spec("power:alpha=3"));
  CHECK(d3.kind == ErgodicDegree::Kind::finite);
  CHECK(d3.d == doctest::Approx(1.0));
  CHECK(ergodic_degree(parse_tail_spec("power:alpha=2")).d == doctest::Approx(0.0));
  CHECK(ergodic_degree(parse_tail_spec("geometric:q=0.5")).kind == ErgodicDegree::Kind::infinite_degree);

  // explicit atoms with a log-corrected power law: the local exponent drifts
  std::vector<double> p(4000);
  double s = 0.0;
  for (std::size_t n = 1; n <= p.size(); ++n) s += p[n - 1] = 1.0 / (std::pow(n + 1.0, 2.0) * std::pow(std::log(n + 1.0), 3.0));
  for (auto& v : p) v /= s;
  auto u = ergodic_degree_from_atoms(make_law(p), 5, 4000);
  CHECK(u.kind == ErgodicDegree::Kind::undefined);
  std::vector<double> pw(4000);
  s = 0.0;
  for (std::size_t n = 1; n <= pw.size(); ++n) s += pw[n - 1] = std::pow(static_cast<double>(n), -3.0);
  for (auto& v : pw) v /= s;
  auto f = ergodic_degree_from_atoms(make_law(pw), 10, 4000);
  CHECK(f.kind == ErgodicDegree::Kind::finite);
  CHECK(f.d == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fit_exponent") {
  std::vector<double> a(10001), b(10001), c(10001, 3.0);
  for (std::size_t n = 1; n <= 10000; ++n) {
    double x = static_cast<double>(n);
    a[n] = std::pow(x, -2.0);
    b[n] = 5.0 * std::pow(x, -0.5) * (1.0 + 0.1 / x);
  }
  auto fa = fit_exponent(a, 10, 10000);
  CHECK(std::abs(fa.slope + 2.0) < 1e-9);
  CHECK(fa.points >= 20);
  CHECK(std::abs(fit_exponent(b, 1000, 10000).slope + 0.5) < 0.01);
  CHECK(std::abs(fit_exponent(c, 10, 10000).slope) < 1e-12);
  std::vector<double> neg = a;
  neg[500] = -1.0;
  CHECK_THROWS_AS(fit_exponent(neg, 10, 10000), DomainError);
  CHECK_THROWS_AS(fit_exponent(a, 100, 10), ValidationError);
}

TEST_CASE("tail law CSV round trip") {
  TailLaw law = make_law_auto_tail({0.5, 0.2, 0.1}, 3.0);
  std::stringstream ss;
  write_tail_csv(ss, law);
  TailLaw back = read_tail_csv(ss);
  REQUIRE(back.K() == 3);
  CHECK(back.p(2) == doctest::Approx(0.2));
  REQUIRE(back.tail);
  CHECK(back.tail->alpha == doctest::Approx(3.0));
  CHECK(back.p(10) == doctest::Approx(law.p(10)).epsilon(1e-12));
  CHECK(back.normalized);

  std::stringstream auto_tail("n,p\n1,0.5\n2,0.25\n# tail: alpha=2.5,c=auto\n");
  TailLaw a = read_tail_csv(auto_tail);
  CHECK(a.explicit_mass() + a.tail_mass() == doctest::Approx(1.0).epsilon(1e-12));
  std::stringstream bad("x,y\n1,0.5\n");
  CHECK_THROWS_AS(read_tail_csv(bad), ValidationError);
}
