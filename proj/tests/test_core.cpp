#include "doctest.h"

#include "heis/core.hpp"
#include "heis/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace heis;

namespace {
bool near(const HPoint& a, const HPoint& b, double tol = 1e-12) {
  if (a.dim() != b.dim()) return false;
  return (a.x - b.x).norm() <= tol && (a.y - b.y).norm() <= tol && std::abs(a.t - b.t) <= tol;
}

// coordinates, not gauge distance: N is only Holder-1/2 in t
double max_diff(const HPoint& a, const HPoint& b) {
  return std::max({(a.x - b.x).cwiseAbs().maxCoeff(), (a.y - b.y).cwiseAbs().maxCoeff(), std::abs(a.t - b.t)});
}
}  // namespace

TEST_CASE("group law on H^1") {
  CHECK(near(group_mul({1, 0, 0}, {0, 1, 0}), {1, 1, -2}));
  const HPoint xi{0.3, -1.2, 2.5};
  CHECK(near(group_mul(xi, HPoint::identity(1)), xi));
  CHECK(near(group_mul(group_mul({1, 0, 0}, {0, 1, 0}), {0, 0, 5}), group_mul({1, 0, 0}, group_mul({0, 1, 0}, {0, 0, 5}))));
  CHECK(near(group_inv(HPoint::identity(1)), HPoint::identity(1)));
  CHECK(near(group_inv({1, 2, 3}), {-1, -2, -3}));
  CHECK(near(group_mul({1, 1, -2}, group_inv({1, 1, -2})), HPoint::identity(1)));
}

TEST_CASE("dilations and gauge norm") {
  CHECK(near(dilate(2.0, {1, 1, 1}), {2, 2, 4}));
  CHECK(near(dilate(1.0, {0.5, 3, -2}), {0.5, 3, -2}));
  CHECK_THROWS_AS(dilate(0.0, {1, 1, 1}), DomainError);
  CHECK(gauge_norm(HPoint::identity(1)) == 0.0);
  CHECK(gauge_norm({0, 0, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gauge_norm({1, 1, -2}) == doctest::Approx(std::pow(8.0, 0.25)).epsilon(1e-15));
  CHECK(gauge_dist(HPoint::identity(1), {1, 1, -2}) == doctest::Approx(std::pow(8.0, 0.25)).epsilon(1e-15));

  auto rng = stream(7, 0);
  for (int i = 0; i < 200; ++i) {
    const HPoint a = random_in_gauge_ball(rng, 2, 5.0), b = random_in_gauge_ball(rng, 2, 5.0);
    const HPoint z = random_in_gauge_ball(rng, 2, 5.0);
    const double lam = log_uniform(rng, 0.1, 10.0);
    CHECK(gauge_norm(dilate(lam, a)) == doctest::Approx(lam * gauge_norm(a)).epsilon(1e-12));
    CHECK(gauge_dist(group_mul(z, a), group_mul(z, b)) == doctest::Approx(gauge_dist(a, b)).epsilon(1e-12));
    CHECK(gauge_dist(a, a) == 0.0);
  }
}

TEST_CASE("dimension checks") {
  CHECK_THROWS_AS(group_mul({1, 0, 0}, {1, 0, 0, 0, 0}), DimensionError);
  CHECK_THROWS_AS(HPoint({1.0, 2.0}), DimensionError);
}

TEST_CASE("horizontal exponential and planes") {
  CHECK(near(exp_horizontal(HPoint::identity(1), HorizontalVector{1, 0}), {1, 0, 0}));
  CHECK(near(exp_horizontal({1, 0, 0}, HorizontalVector{0, 1}), {1, 1, -2}));
  auto rng = stream(3, 1);
  for (int i = 0; i < 100; ++i) {
    const HPoint p = random_in_gauge_ball(rng, 3, 4.0);
    const HorizontalVector v = random_unit(rng, 3) * uniform(rng, 0.0, 5.0);
    CHECK(on_horizontal_plane(p, exp_horizontal(p, v)));
  }
  const HPoint p0{0.4, 0.1, -0.3};
  CHECK(on_horizontal_plane(p0, p0));
  CHECK(on_horizontal_plane(HPoint::identity(1), {1, 1, 0}));
  CHECK_FALSE(on_horizontal_plane(HPoint::identity(1), {0, 0, 1}));
}

TEST_CASE("plane traces") {
  const HPoint e = HPoint::identity(1);
  CHECK(plane_trace(e, e).kind == TraceKind::identical);

  const PlaneTrace tr = plane_trace(e, {1, 0, 0});
  REQUIRE(tr.kind == TraceKind::proper);
  // b = 0: (a, 0) solves it, (0, 1) does not
  CHECK(std::abs(tr.residual(HorizontalVector{0.7, 0})) < 1e-12);
  CHECK(std::abs(tr.residual(HorizontalVector{0, 1})) > 1e-3);

  // no point of H_e has (0,0,1) on its plane
  CHECK(plane_trace(e, {0, 0, 1}).kind == TraceKind::empty);

  // for a proper trace every solution v gives p1 on the plane at p0 o exp v
  const HPoint p0{0.5, -1, 2}, p1{1.5, 0.5, -3};
  const PlaneTrace t2 = plane_trace(p0, p1);
  REQUIRE(t2.kind == TraceKind::proper);
  const HorizontalVector v = t2.closest_point();
  CHECK(on_horizontal_plane(exp_horizontal(p0, v), p1, 1e-9));
}

TEST_CASE("three-hop decomposition") {
  const Decomposition3 d0 = decompose3(HPoint::identity(1));
  CHECK(d0.max_norm == doctest::Approx(0.0));
  const Decomposition3 d1 = decompose3({2, 0, 0}, DecomposeStrategy::coordinate);
  CHECK(max_diff(recompose(d1), {2, 0, 0}) < 1e-12);

  const Decomposition3 d = decompose3({0, 0, std::sqrt(3.0)}, DecomposeStrategy::minmax);
  CHECK(d.max_norm <= 1.0 + 1e-6);
  CHECK(max_diff(recompose(d), {0, 0, std::sqrt(3.0)}) < 1e-12);

  auto rng = stream(11, 0);
  for (int i = 0; i < 100; ++i) {
    const HPoint p = random_in_gauge_ball(rng, 2, 3.0);
    for (auto s : {DecomposeStrategy::coordinate, DecomposeStrategy::minmax}) {
      const Decomposition3 dd = decompose3(p, s);
      CHECK(max_diff(recompose(dd), p) < 1e-12 * (1 + gauge_norm(p) * gauge_norm(p)));
    }
    // minmax agrees with the closed-form tilde norm (radial in x, y)
    CHECK(decompose3(p).max_norm == doctest::Approx(tilde_norm_closed_form(p)).epsilon(1e-9));
  }
}

TEST_CASE("tilde balls") {
  const HPoint e = HPoint::identity(1);
  CHECK(tilde_ball_contains(e, 1.0, {3, 0, 0}));
  CHECK_FALSE(tilde_ball_contains(e, 1.0, {3.01, 0, 0}));
  CHECK(tilde_ball_contains(e, 1.0, {0, 0, std::sqrt(3.0)}));
  CHECK_FALSE(tilde_ball_contains(e, 1.0, {0, 0, 1.8}));
  CHECK(tilde_t_max(1.0, 2.0) == doctest::Approx(3.0 * std::sqrt(3.0)).epsilon(1e-15));
  CHECK(tilde_norm_closed_form({0, 0, std::sqrt(3.0)}) == doctest::Approx(1.0).epsilon(1e-12));

  // n = 2: the search agrees with the closed form away from the boundary
  auto rng = stream(5, 2);
  for (int i = 0; i < 30; ++i) {
    const HPoint p = random_in_gauge_ball(rng, 2, 2.0);
    const double r = tilde_norm_closed_form(p);
    CHECK(tilde_ball_contains(HPoint::identity(2), r * 1.01, p, TildeMethod::search));
    CHECK_FALSE(tilde_ball_contains(HPoint::identity(2), r * 0.99, p, TildeMethod::search));
  }
  // three hops of length <= r stay in the gauge ball of radius 3r
  for (int i = 0; i < 200; ++i) {
    const double r = uniform(rng, 0.1, 3.0);
    HPoint p = HPoint::identity(2);
    for (int k = 0; k < 3; ++k) p = exp_horizontal(p, random_unit(rng, 2) * uniform(rng, 0.0, r));
    CHECK(gauge_norm(p) <= 3.0 * r * (1 + 1e-12));
  }
}
