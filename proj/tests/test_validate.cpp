#include "doctest.h"

#include "heis/validate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace heis;

TEST_CASE("closed-form boundary") {
  CHECK(closed_form_t_max(1, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(closed_form_t_max(1, 3) == doctest::Approx(0.0));
  CHECK(closed_form_t_max(1, 2) == doctest::Approx(3.0 * std::sqrt(3.0)).epsilon(1e-15));
  CHECK(closed_form_t_max(4, 0) == doctest::Approx(4.0 * std::sqrt(3.0)).epsilon(1e-15));
  CHECK_THROWS_AS(closed_form_t_max(1, 3.1), DomainError);
  CHECK_THROWS_AS(closed_form_t_max(1, -0.1), DomainError);
  CHECK_THROWS_AS(closed_form_t_max(0, 0), DomainError);
}

TEST_CASE("parametric curve") {
  const ProfilePoint p0 = eta(1, 0);
  CHECK(p0.point.x[0] == doctest::Approx(3.0));
  CHECK(p0.point.y[0] == doctest::Approx(0.0));
  CHECK(p0.point.t == doctest::Approx(0.0));
  CHECK(p0.d == doctest::Approx(3.0));
  CHECK(p0.t == doctest::Approx(0.0));
  const ProfilePoint p1 = eta(1, -2.0 * std::numbers::pi / 3.0);
  CHECK(std::abs(p1.point.x[0]) < 1e-12);
  CHECK(std::abs(p1.point.y[0]) < 1e-12);
  CHECK(p1.point.t == doctest::Approx(std::sqrt(3.0)));
  const ProfilePoint p2 = eta(1, -std::numbers::pi / 3.0);
  CHECK(p2.t == doctest::Approx(3.0 * std::sqrt(3.0)));
  CHECK(p2.d == doctest::Approx(2.0));
  CHECK_THROWS_AS(eta(1, 0.1), DomainError);
  CHECK_THROWS_AS(eta(1, -2.2), DomainError);

  // the t-maximum over a dense grid sits at -pi/3
  double best = -1, arg = 0;
  for (int i = 0; i <= 100000; ++i) {
    const double th = -2.0 * std::numbers::pi / 3.0 * i / 100000.0;
    const ProfilePoint p = eta(2.0, th);
    if (p.t > best) {
      best = p.t;
      arg = th;
    }
  }
  CHECK(std::abs(best - 3.0 * std::sqrt(3.0) * 2.0) < 1e-6);
  CHECK(std::abs(arg + std::numbers::pi / 3.0) < 1e-4);
}

TEST_CASE("exact membership and boundary distance") {
  const HPoint e = HPoint::identity(1);
  CHECK(sqnorm_hn_contains_exact(e, 1.0, {0, 0, 1.7}));
  CHECK_FALSE(sqnorm_hn_contains_exact(e, 1.0, {0, 0, 1.8}));
  CHECK_FALSE(sqnorm_hn_contains_exact(e, 1.0, {3, 0, 0}));  // open section
  const HPoint c{1, 2, 3};
  CHECK(sqnorm_hn_contains_exact(c, 1.0, group_mul(c, {0, 0, 1.7})));

  CHECK(distance_to_boundary(1.0, 0.0, std::sqrt(3.0)) < 1e-9);
  CHECK(distance_to_boundary(1.0, 2.0, 3.0 * std::sqrt(3.0)) < 1e-9);
  CHECK(distance_to_boundary(1.0, 3.0, 0.0) < 1e-9);
  CHECK(distance_to_boundary(1.0, 4.0, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(distance_to_boundary(1.0, 0.0, 0.0) > 1.0);
}

TEST_CASE("agreement on interior and exterior grids") {
  std::vector<std::pair<double, double>> inner, outer;
  for (int i = 0; i < 7; ++i) {
    const double rho = 3.0 * i / 7.0;
    const double tm = closed_form_t_max(1.0, rho);
    for (int j = 0; j <= 3; ++j) {
      inner.emplace_back(rho, 0.5 * tm * j / 3.0);
      outer.emplace_back(rho, 1.5 * tm + 0.5 * j);
    }
  }
  const AgreementReport ri = example_agreement(inner, 1.0, 0.0, HnBudget::quick());
  const AgreementReport ro = example_agreement(outer, 1.0, 0.0, HnBudget::quick());
  CHECK(ri.compared == inner.size());
  CHECK(ri.rate == 1.0);
  CHECK(ro.rate == 1.0);
  CHECK(ro.closed_in == 0);
}

TEST_CASE("plot script") {
  std::ostringstream os;
  write_plot_script(os, "profile.csv", 1.0);
  CHECK(os.str().find("'profile.csv'") != std::string::npos);
  CHECK(os.str().find("plot") != std::string::npos);
}

TEST_CASE("chain stops at the convexity stage") {
  const ChainReport r = chain_suite(HConvexFn::from_expr("-(x1^2)", 1));
  REQUIRE(r.stages.size() == 7);
  CHECK(r.stages[0].status == StageStatus::fail);
  for (std::size_t i = 1; i < r.stages.size(); ++i) CHECK(r.stages[i].status == StageStatus::skipped);
  CHECK_FALSE(r.all_pass());
}
