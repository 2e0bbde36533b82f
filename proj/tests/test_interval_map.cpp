#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ilab/error.hpp"
#include "ilab/interval_map.hpp"
#include "ilab/numeric.hpp"

using namespace ilab;

TEST_CASE("map: evaluation and derivative") {
  MapModel m1 = make_lsv(1.0);
  auto e = map_apply_deriv(m1, 0.25);
  CHECK(e.F == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(e.dF == doctest::Approx(2.0).epsilon(1e-15));
  for (double s : {0.3, 0.5, 1.0, 2.0}) {
    MapModel m = make_lsv(s);
    auto r = map_apply_deriv(m, 0.75);
    CHECK(r.F == doctest::Approx(0.5));
    CHECK(r.dF == 2.0);
    CHECK(map_apply_deriv(m, 0.0).F == 0.0);
    CHECK(map_apply_deriv(m, 0.0).dF == 1.0);
    CHECK(map_apply_deriv(m, 0.5).F == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(map_apply_deriv(m1, 1.5), DomainError);
  CHECK_THROWS_AS(map_apply_deriv(m1, -0.1), DomainError);
}

TEST_CASE("map: spec strings") {
  MapModel m = parse_map_spec("lsv:s=0.5");
  CHECK(m.s == 0.5);
  CHECK(m.r == doctest::Approx(std::sqrt(2.0)));
  CHECK(parse_map_spec(map_spec_string(m)).s == 0.5);
  CHECK_THROWS_AS(parse_map_spec("tent:s=1"), ValidationError);
  CHECK_THROWS_AS(parse_map_spec("lsv:s=-1"), ValidationError);
}

TEST_CASE("map: near-origin asymptotics") {
  for (double s : {0.5, 1.0, 2.0}) {
    MapModel m = make_lsv(s);
    for (double x : {1e-3, 1e-5}) {
      double F = map_apply_deriv(m, x).F;
      CHECK(std::abs(F - x - m.r * std::pow(x, 1.0 + s)) / std::pow(x, 1.0 + s) < 1e-6);
    }
  }
}

TEST_CASE("inverse branches") {
  MapModel m = make_lsv(1.0);
  CHECK(inverse_branch(m, 0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(inverse_branch(m, 0, 0.5) == doctest::Approx((std::sqrt(5.0) - 1.0) / 4.0).epsilon(1e-15));
  CHECK(inverse_branch(m, 1, 0.0) == 0.5);
  SplitMix64 rng(3);
  for (double s : {0.25, 0.5, 1.0, 3.0}) {
    MapModel ms = make_lsv(s);
    for (int i = 0; i < 200; ++i) {
      double y = rng.uniform();
      double x0 = inverse_branch(ms, 0, y), x1 = inverse_branch(ms, 1, y);
      CHECK(x0 <= ms.q);
      CHECK(x1 >= ms.q);
      CHECK(std::abs(map_apply_deriv(ms, x0).F - y) <= 1e-14);
      CHECK(std::abs(map_apply_deriv(ms, x1).F - y) <= 1e-14);
      double d = inverse_branch_deriv(ms, 0, y);
      CHECK(d == doctest::Approx(1.0 / map_apply_deriv(ms, x0).dF).epsilon(1e-12));
    }
  }
}

TEST_CASE("first passage") {
  MapModel m = make_lsv(1.0);
  CHECK(first_passage(m, 0.75).tau == 1);
  CHECK(first_passage(m, 0.4).tau == 2);
  CHECK_THROWS_AS(first_passage(m, 0.0), DomainError);
  BranchGeometry g = level_sets(m, 60);
  for (std::size_t n = 1; n <= 50; ++n) CHECK(first_passage(m, 0.5 * (g.x[n] + g.x[n - 1])).tau == n);
  Passage p = first_passage(m, 1e-9, 1000);
  CHECK(p.overflow);
}

TEST_CASE("level sets") {
  MapModel m = make_lsv(1.0);
  BranchGeometry g = level_sets(m, 10000);
  CHECK(g.x[0] == 1.0);
  CHECK(g.x[1] == doctest::Approx(0.5).epsilon(1e-15));
  for (std::size_t n = 1; n <= 10000; ++n) {
    REQUIRE(g.x[n] < g.x[n - 1]);
    REQUIRE(g.x[n] > 0.0);
    REQUIRE(g.x[n] <= m.q);
    REQUIRE(g.len[n] > 0.0);
  }
  double nx = 1e4 * g.x[10000], n2a = 1e8 * g.len[10000];
  CHECK(nx > 0.49);
  CHECK(nx < 0.51);
  CHECK(n2a > 0.49);
  CHECK(n2a < 0.51);
  // monotone approach of 2 n x_n and n^2 |A_n| past n = 100
  for (std::size_t n = 200; n <= 10000; n += 100) {
    double a = static_cast<double>(n), b = static_cast<double>(n - 100);
    CHECK(std::abs(2.0 * a * g.x[n] - 1.0) <= std::abs(2.0 * b * g.x[n - 100] - 1.0));
    CHECK(std::abs(a * a * g.len[n] - 0.5) <= std::abs(b * b * g.len[n - 100] - 0.5));
  }
  std::stringstream ss;
  write_geometry_csv(ss, level_sets(m, 3));
  CHECK(ss.str().find("n,x_n,len_n") != std::string::npos);
}

TEST_CASE("induced map") {
  MapModel m = make_lsv(1.0);
  CHECK(induced_apply(m, 0.75).G == doctest::Approx(0.5));
  auto e = induced_apply(m, 0.4);
  CHECK(e.G == doctest::Approx(0.44).epsilon(1e-14));
  CHECK(e.tau == 2);
  CHECK(induced_apply(m, 1.0).G == 1.0);
  // G maps each A_n onto [0,1]
  BranchGeometry g = level_sets(m, 100);
  for (std::size_t n = 1; n <= 100; ++n) {
    CHECK(std::abs(induced_apply(m, g.x[n - 1]).G - 1.0) <= 1e-10);
    double xl = g.x[n] + 1e-13 * g.len[n];
    CHECK(std::abs(induced_apply(m, xl).G) <= 1e-10);
  }
}

TEST_CASE("induced inverse branches") {
  MapModel m = make_lsv(1.0);
  auto b1 = induced_inverse_branch(m, 1, 0.3);
  CHECK(b1.x == doctest::Approx(0.65));
  CHECK(b1.dx == 0.5);
  CHECK(induced_inverse_branch(m, 2, 0.0).x == doctest::Approx((std::sqrt(5.0) - 1.0) / 4.0).epsilon(1e-14));
  double h = 1e-6;
  double fd = (induced_inverse_branch(m, 3, 0.3 + h).x - induced_inverse_branch(m, 3, 0.3 - h).x) / (2 * h);
  CHECK(std::abs(fd - induced_inverse_branch(m, 3, 0.3).dx) < 1e-7);

  SplitMix64 rng(42);
  for (double s : {0.5, 2.0}) {
    MapModel ms = make_lsv(s);
    BranchGeometry g = level_sets(ms, 60);
    for (int i = 0; i < 100; ++i) {
      std::size_t k = 1 + rng.next() % 50;
      double y = 0.02 + 0.96 * rng.uniform();
      auto b = induced_inverse_branch(ms, k, y);
      CHECK(b.x >= g.x[k]);
      CHECK(b.x <= g.x[k - 1]);
      auto fwd = induced_apply(ms, b.x);
      CHECK(fwd.tau == k);
      CHECK(std::abs(fwd.G - y) < 1e-12);
      double eps = 1e-6;
      double fdi = (induced_inverse_branch(ms, k, y + eps).x - induced_inverse_branch(ms, k, y - eps).x) / (2 * eps);
      CHECK(std::abs(fdi - b.dx) <= 1e-6 * b.dx);
      CHECK(fwd.dG * b.dx == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("distortion") {
  MapModel m = make_lsv(1.0);
  auto sups = distortion_check(m, 8, 200, 1);
  REQUIRE(sups.size() == 9);
  std::vector<double> ratios;
  for (std::size_t l = 1; l < 8; ++l) ratios.push_back(sups[l + 1] / sups[l]);
  std::sort(ratios.begin(), ratios.end());
  CHECK(ratios[ratios.size() / 2] <= 0.9);
  // depth 0 gap stays bounded as the symbol cutoff grows
  auto deep = distortion_check(m, 0, 400, 9, 200);
  CHECK(deep[0] < 2.0);
  CHECK(distortion_check(m, 2, 50, 5) == distortion_check(m, 2, 50, 5));
}

TEST_CASE("coding") {
  MapModel m = make_lsv(1.0);
  CHECK(coding(m, 0.75, 1)[0] == 1);
  auto w = coding(m, 0.4, 3);
  CHECK(w[0] == 0);
  CHECK(w[1] == 1);
  BranchGeometry g = level_sets(m, 20);
  auto z = coding(m, 0.5 * g.x[12], 12);
  for (int b : z) CHECK(b == 0);
}
