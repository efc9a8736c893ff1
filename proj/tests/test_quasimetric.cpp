#include "doctest.h"

#include "heis/quasimetric.hpp"
#include "heis/sampling.hpp"

#include <cmath>

using namespace heis;

TEST_CASE("distance checkpoints") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  const HPoint e = HPoint::identity(1);
  CHECK(d_phi(f, {1, 2, 3}, {1, 2, 3}).value == 0.0);
  const QuasiDistance a = d_phi(f, e, {3, 0, 0});
  CHECK(std::abs(a.value - 1.0) <= 1e-3);
  CHECK(a.s_lo < a.s_hi);
  CHECK(a.value == a.s_hi);
  CHECK(std::abs(d_phi(f, e, {0, 0, std::sqrt(3.0)}).value - 1.0) <= 1e-3);

  const HPoint p{0.3, -0.7, 1.1}, q{-1.0, 0.4, -0.2};
  CHECK(d_phi(f, p, q).value == d_phi(f, q, p).value);
}

TEST_CASE("balls") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  const HPoint e = HPoint::identity(1);
  CHECK(ball_contains(f, {1, 1, 1}, 0.01, {1, 1, 1}));
  CHECK(ball_contains(f, e, 1.05, {3, 0, 0}));
  CHECK_FALSE(ball_contains(f, e, 0.95, {3, 0, 0}));
  CHECK_THROWS_AS(ball_contains(f, e, 0.0, {3, 0, 0}), DomainError);
}

TEST_CASE("quasi-triangle constant") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  QuasiOptions q;
  q.budget = HnBudget::quick();
  const TriangleEstimate te = quasi_triangle_constant(f, 12, 1, 3.0, q);
  CHECK(te.triples == 12);
  CHECK(std::isfinite(te.H_est));
  CHECK(te.H_est > 0.0);

  // points on one horizontal line through e: d = (|dx| / 3)^2, so the ratio
  // is b^2 / (a^2 + (b - a)^2) <= 2, with equality at the midpoint
  const HPoint e = HPoint::identity(1);
  const double b = 3.0;
  for (double a : {0.5, 1.5, 2.5}) {
    const double num = d_phi(f, e, {b, 0, 0}).value;
    const double den = d_phi(f, e, {a, 0, 0}).value + d_phi(f, {a, 0, 0}, {b, 0, 0}).value;
    const double expect = b * b / (a * a + (b - a) * (b - a));
    CHECK(num / den == doctest::Approx(expect).epsilon(3e-3));
    CHECK(num / den <= 2.0 * (1 + 3e-3));
  }
  // xi = zeta
  CHECK(d_phi(f, {1, 0, 0}, {1, 0, 0}).value == 0.0);
}

TEST_CASE("ball sandwich") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  QuasiOptions q;
  q.budget = HnBudget::quick();
  const double H = quasi_triangle_constant(f, 20, 1, 3.0, q).H_est;
  const SandwichReport ok = ball_sandwich_check(f, HPoint::identity(1), 1.0, H, 12, 1, q);
  CHECK(ok.left_defects.empty());
  CHECK(ok.right_defects.empty());
  const SandwichReport bad = ball_sandwich_check(f, HPoint::identity(1), 1.0, H / 10.0, 12, 1, q);
  CHECK_FALSE(bad.left_defects.empty());
}

TEST_CASE("distance matrix") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  const std::vector<HPoint> pts{HPoint::identity(1), {3, 0, 0}, {0, 0, 1}};
  QuasiOptions q;
  q.budget = HnBudget::quick();
  const auto d = distance_matrix(f, pts, q);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(d[i][i].value == 0.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(d[i][j].value == d[j][i].value);
  }
  CHECK(std::abs(d[0][1].value - 1.0) < 1e-3);
}
