#include "doctest.h"

#include "heis/engulfing.hpp"
#include "heis/hnsections.hpp"
#include "heis/sampling.hpp"
#include "heis/validate.hpp"

#include <cmath>
#include <numbers>

using namespace heis;

TEST_CASE("membership on the t-axis and at the widest point") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  const HPoint e = HPoint::identity(1);
  CHECK(hn_contains(f, e, 1.0, {0, 0, 1.7}).in());
  CHECK_FALSE(hn_contains(f, e, 1.0, {0, 0, 1.8}).in());
  CHECK(hn_contains(f, e, 1.0, {2, 0, 5.19}).in());
  CHECK_FALSE(hn_contains(f, e, 1.0, {2, 0, 5.21}).in());

  const HnMembership self = hn_contains(f, {1, 2, 3}, 0.5, {1, 2, 3});
  REQUIRE(self.in());
  CHECK(verify_witness(f, {1, 2, 3}, 0.5, {1, 2, 3}, self.witness));
}

TEST_CASE("witness verification") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  const HPoint e = HPoint::identity(1);
  const HnMembership m = hn_contains(f, e, 1.0, {0.5, 0.2, 0.9});
  REQUIRE(m.in());
  CHECK(verify_witness(f, e, 1.0, {0.5, 0.2, 0.9}, m.witness));

  // equilateral hops of length 1 - eps at angles 0, -2pi/3, -4pi/3
  const double a = 1.0 - 1e-9;
  const double th = -2.0 * std::numbers::pi / 3.0;
  Witness w;
  w.xi1 = exp_horizontal(e, HorizontalVector{a, 0});
  w.xi2 = exp_horizontal(w.xi1, HorizontalVector{a * std::cos(th), a * std::sin(th)});
  const HPoint end = exp_horizontal(w.xi2, HorizontalVector{a * std::cos(2 * th), a * std::sin(2 * th)});
  CHECK(std::abs(end.t - std::sqrt(3.0) * a * a) < 1e-12);
  CHECK(verify_witness(f, e, 1.0, end, w));

  // second hop pushed to height 1.1
  Witness bad = w;
  const double b = std::sqrt(1.1);
  bad.xi2 = exp_horizontal(w.xi1, HorizontalVector{b * std::cos(th), b * std::sin(th)});
  const HPoint end2 = exp_horizontal(bad.xi2, HorizontalVector{a * std::cos(2 * th), a * std::sin(2 * th)});
  CHECK_FALSE(verify_witness(f, e, 1.0, end2, bad));
}

TEST_CASE("witness reversal") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  auto rng = stream(21, 0);
  for (int i = 0; i < 20; ++i) {
    const HPoint c = random_in_gauge_ball(rng, 1, 3.0);
    const SampledHnPoint sp = sample_hn_point(f, c, 1.0, rng);
    const ReversedWitness rw = reverse_witness(f, c, 1.0, sp.point, sp.witness, 1.0 + 1e-6);
    CHECK(rw.ok);
    CHECK(verify_witness(f, sp.point, 1.0 + 1e-6, c, rw.witness));
  }
  const HPoint p{1, 1, 1};
  Witness deg;
  deg.xi1 = p;
  deg.xi2 = p;
  const ReversedWitness r0 = reverse_witness(f, p, 1.0, p, deg, 1.0 + 1e-6);
  CHECK(r0.ok);
  CHECK(gauge_dist(r0.witness.xi1, p) == 0.0);

  const HConvexFn w = HConvexFn::wang();
  const double Kp = estimate_Kpp(w, 4000, 1).Kpp * (1 + 1e-6);
  for (int i = 0; i < 20; ++i) {
    const HPoint c = random_in_gauge_ball(rng, 1, 2.0);
    const SampledHnPoint sp = sample_hn_point(w, c, 1.0, rng);
    CHECK(reverse_witness(w, c, 1.0, sp.point, sp.witness, Kp).ok);
  }
}

TEST_CASE("E(H^n,K) sampling") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  HnEngulfingSampling hs;
  hs.n_sections = 6;
  const HnEngulfingReport tight = check_E_HnK(f, 1.0001, hs, sqnorm_membership());
  CHECK_FALSE(tight.violations.empty());
  const HnEngulfingReport ok = check_E_HnK(f, 16.0, hs, sqnorm_membership());
  CHECK(ok.violations.empty());
  CHECK(ok.checks > 0);
}

TEST_CASE("triple union inclusions") {
  const TripleUnionReport r = triple_union_inclusion(HConvexFn::sqnorm(1), {0.5, -1, 2}, 1.0, 200, 1);
  CHECK(r.defects_a.empty());
  CHECK(r.defects_b.empty());
  const TripleUnionReport rt = triple_union_inclusion(HConvexFn::sqnorm_t(1), {1, 0, 0}, 1.0, 200, 1);
  CHECK(rt.defects_a.empty());
  const TripleUnionReport tiny = triple_union_inclusion(HConvexFn::sqnorm(1), HPoint::identity(1), 1e-6, 50, 1);
  CHECK(tiny.defects_a.empty());
}

TEST_CASE("boundary profile of the example") {
  const auto rows = hn_boundary_profile(HConvexFn::sqnorm(1), HPoint::identity(1), 1.0, {0.0, 2.0, 3.0});
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[0].t_sup - std::sqrt(3.0)) < 1e-3);
  CHECK(std::abs(rows[1].t_sup - 3.0 * std::sqrt(3.0)) < 1e-3);
  CHECK(std::abs(rows[2].t_sup) < 1e-3);
}

TEST_CASE("left translation") {
  const HConvexFn f = HConvexFn::sqnorm(1);
  const HPoint c{1.5, -0.5, 2.0};
  auto rng = stream(33, 0);
  for (int i = 0; i < 10; ++i) {
    const HPoint q = random_in_gauge_ball(rng, 1, 2.0);
    const double r = tilde_norm_closed_form(q);
    if (std::abs(r * r - 1.0) < 0.05) continue;
    CHECK(hn_contains(f, c, 1.0, group_mul(c, q)).in() == hn_contains(f, HPoint::identity(1), 1.0, q).in());
  }
}
