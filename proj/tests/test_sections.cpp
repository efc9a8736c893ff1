#include "doctest.h"

#include "heis/sampling.hpp"
#include "heis/sections.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

using namespace heis;

TEST_CASE("excess") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  auto rng = stream(4, 0);
  for (int i = 0; i < 50; ++i) {
    const HPoint c = random_in_gauge_ball(rng, 1, 5.0);
    const HSectionSpec spec = HSectionSpec::at(f, c, 1.0);
    const HorizontalVector v = random_unit(rng, 1) * uniform(rng, 0.0, 4.0);
    CHECK(excess(f, c, spec.p, c) == doctest::Approx(0.0));
    CHECK(excess(f, c, spec.p, exp_horizontal(c, v)) == doctest::Approx(v.norm() * v.norm()).epsilon(1e-12));
    CHECK(excess_v(f, spec, v) == doctest::Approx(v.norm() * v.norm()).epsilon(1e-12));
  }
  // off the plane
  CHECK_THROWS_AS(excess(f, HPoint::identity(1), HorizontalVector{0, 0}, {0, 0, 1}), DomainError);
}

TEST_CASE("section radii") {
  const HPoint e = HPoint::identity(1);
  const HConvexFn f = HConvexFn::sqnorm(1);
  for (const auto& u : sphere_directions(1, 12))
    CHECK(h_section_radius(f, HSectionSpec::at(f, {1, -2, 3}, 4.0), u) == doctest::Approx(2.0).epsilon(1e-9));
  const HConvexFn ft = HConvexFn::sqnorm_t(1);
  for (const auto& u : sphere_directions(1, 12))
    CHECK(h_section_radius(ft, HSectionSpec::at(ft, e, 1.0), u) == doctest::Approx(1.0).epsilon(1e-9));
  const HConvexFn aff = HConvexFn::from_expr("x1", 1);
  CHECK(h_section_radius(aff, HSectionSpec::at(aff, e, 1.0), HorizontalVector{-1, 0}) == kUnbounded);
  const HConvexFn concave = HConvexFn::from_expr("-(x1^2)", 1);
  CHECK_THROWS_AS(h_section_radius(concave, HSectionSpec::at(concave, e, 1.0), HorizontalVector{1, 0}),
                  NumericalFailure);
}

TEST_CASE("radial boundary and CSV round trip") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  const RadialBoundary b = h_section_boundary(f, HSectionSpec::at(f, {0.5, 0.5, 0.5}, 1.0), 720);
  REQUIRE(b.radii.size() == 720);
  CHECK(b.bounded());
  CHECK(b.min_radius() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.max_radius() == doctest::Approx(1.0).epsilon(1e-9));

  std::ostringstream os;
  write_csv(os, b);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "dir_1,dir_2,radius");
  std::size_t k = 0;
  while (std::getline(is, line)) {
    const auto c2 = line.rfind(',');
    const double r = std::strtod(line.c_str() + c2 + 1, nullptr);
    CHECK(r == b.radii[k]);  // 17 significant digits round-trip exactly
    ++k;
  }
  CHECK(k == 720);

  const HConvexFn w = HConvexFn::wang();
  const RadialBoundary bw = h_section_boundary(w, HSectionSpec::at(w, HPoint::identity(1), 1.0), 360);
  CHECK(bw.max_radius() / bw.min_radius() > 1.2);
}

TEST_CASE("m and M") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  for (double r : {0.1, 1.0, 7.0}) {
    const SlopeProfile p = m_M(f, {1, 2, 3}, r);
    CHECK(p.m == doctest::Approx(r * r).epsilon(1e-12));
    CHECK(p.M == doctest::Approx(r * r).epsilon(1e-12));
  }
  const SlopeProfile pw = m_M(HConvexFn::wang(), HPoint::identity(1), 10.0);
  CHECK(pw.m <= 2.0 * std::pow(10.0, 4.0 / 3.0) + 1e-9);
  CHECK(pw.M >= 1e4);

  const SlopeProfile p2 = m_M(HConvexFn::sqnorm(2), HPoint::identity(2), 2.0);
  CHECK(p2.m == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(p2.M == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("round constants") {
  CHECK(round_constants(HConvexFn::sqnorm(1), {1, 1, 1}, 2.0).ratio == doctest::Approx(1.0).epsilon(1e-9));
  const HConvexFn w = HConvexFn::wang();
  const HPoint e = HPoint::identity(1);
  const double r1 = round_constants(w, e, 1.0).ratio, r3 = round_constants(w, e, 1e3).ratio,
               r6 = round_constants(w, e, 1e6).ratio;
  CHECK(r1 < 1.0);
  CHECK(r3 < r1);
  CHECK(r6 < r3);
  CHECK(r6 < 0.02);

  // sandwich: m(R_in) <= s <= M(R_out)
  const HConvexFn ft = HConvexFn::sqnorm_t(1);
  const HPoint xi{1, 1, 0};
  const RoundConstants rc = round_constants(ft, xi, 1.0);
  CHECK(rc.ratio > 0.0);
  CHECK(rc.ratio <= 1.0);
  CHECK(m_M(ft, xi, rc.R_in).m <= 1.0 + 1e-8);
  CHECK(m_M(ft, xi, rc.R_out).M >= 1.0 - 1e-8);
}

TEST_CASE("slope constant") {
  const std::vector<double> grid{0.5, 1, 2, 4};
  CHECK(slope_constant(HConvexFn::sqnorm(1), 5, grid, 1).K1_est == doctest::Approx(1.0).epsilon(1e-9));
  Eigen::MatrixXd A(2, 2);
  A << 1, 0, 0, 4;
  CHECK(slope_constant(HConvexFn::quad(A), 5, grid, 1).K1_est == doctest::Approx(4.0).epsilon(1e-9));
  const HConvexFn w = HConvexFn::wang();
  const std::vector<HPoint> e{HPoint::identity(1)};
  const double k_small = slope_constant(w, e, {1, 2}).K1_est;
  const double k_big = slope_constant(w, e, {1, 2, 4, 8, 16}).K1_est;
  CHECK(k_big > 10.0 * k_small);
}

TEST_CASE("doubling constants") {
  const DoublingReport d = doubling_report(HConvexFn::sqnorm(1), 5, {0.5, 1, 2}, 1);
  CHECK(d.B1_est == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(d.B2_est == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(d.B4_est == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(d.gamma_est == 1);
}

TEST_CASE("monotonicity of m") {
  const std::vector<double> grid{0.1, 0.2, 0.5, 1, 2, 5, 10};
  CHECK(verify_m_monotone(HConvexFn::sqnorm(1), {1, 0, 0}, grid).monotone);
  CHECK(verify_m_monotone(HConvexFn::wang(), HPoint::identity(1), grid).monotone);
  CHECK(verify_m_monotone(HConvexFn::sqnorm_t(1), {5, 5, 5}, grid).monotone);
  // concave input: m(r) = -r^2
  const MonotoneReport bad = verify_m_monotone(HConvexFn::from_expr("-(x1^2) - y1^2", 1), {0, 0, 0}, {1, 2});
  CHECK_FALSE(bad.monotone);
  CHECK(bad.defects.size() == 1);
}
