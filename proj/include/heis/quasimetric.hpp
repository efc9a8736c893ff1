#pragma once

// The quasi-distance d_phi(xi, xi') = inf{s : each point is in the other's
// H^n-section at height s}, its balls and the quasi-triangle constant.

#include "heis/core.hpp"
#include "heis/funcs.hpp"
#include "heis/hnsections.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace heis {

struct QuasiDistance {
  double value = 0.0;  // = s_hi
  double s_lo = 0.0;
  double s_hi = 0.0;
  Witness forward;   // xi' in S(xi, s_hi)
  Witness backward;  // xi in S(xi', s_hi)
  int queries = 0;   // predicate evaluations in the bracket search
};

struct QuasiOptions {
  double rel_tol = 1e-3;
  double cap = 1e12;
  HnBudget budget = {};
};

QuasiDistance d_phi(const HConvexFn& f, const HPoint& xi, const HPoint& xi_prime, const QuasiOptions& opts = {});

struct TriangleEstimate {
  double H_est = 0.0;
  std::size_t triples = 0;
  std::size_t skipped = 0;  // coincident points
  HPoint worst_xi, worst_eta, worst_zeta;
};

// max over sampled triples of d(xi, zeta) / (d(xi, eta) + d(eta, zeta)).
TriangleEstimate quasi_triangle_constant(const HConvexFn& f, std::size_t n_triples, std::uint64_t seed,
                                         double box = 5.0, const QuasiOptions& opts = {});

bool ball_contains(const HConvexFn& f, const HPoint& xi, double r, const HPoint& xi_prime,
                   const QuasiOptions& opts = {});

struct SandwichDefect {
  HPoint probe;
  double value = 0.0;  // d_phi for the left inclusion, best height for the right one
};

struct SandwichReport {
  std::size_t left_checked = 0;
  std::size_t right_checked = 0;
  std::vector<SandwichDefect> left_defects;   // in S(xi, r / 2H) but d_phi >= r
  std::vector<SandwichDefect> right_defects;  // d_phi < r but not certified in S(xi, r)
};

// S(xi, r / (2 H)) in B_phi(xi, r) in S(xi, r), on sampled probes.
SandwichReport ball_sandwich_check(const HConvexFn& f, const HPoint& xi, double r, double H_est,
                                   std::size_t probes, std::uint64_t seed, const QuasiOptions& opts = {});

// Columns row, col, value, s_lo, s_hi.
void write_distance_csv(std::ostream& os, const std::vector<HPoint>& points,
                        const std::vector<std::vector<QuasiDistance>>& d);
std::vector<std::vector<QuasiDistance>> distance_matrix(const HConvexFn& f, const std::vector<HPoint>& points,
                                                        const QuasiOptions& opts = {});

}  // namespace heis
