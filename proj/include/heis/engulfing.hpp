#pragma once

// Horizontal engulfing: the pair ratio of the three-way characterization,
// the K'' estimator, E(H,K), condition diamond and H-monotonicity.

#include "heis/core.hpp"
#include "heis/funcs.hpp"
#include "heis/sections.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <ostream>
#include <vector>

namespace heis {

struct PairRatio {
  HPoint xi;
  HPoint xi_prime;
  double R = 0.0;
};

// ((q - p) . D) / (f(xi') - f(xi) - p . D), D = Pr1(xi') - Pr1(xi).
double ratio_iii(const HConvexFn& f, const HPoint& xi, const HPoint& xi_prime);

struct PairSampling {
  double box = 10.0;      // base points in B_g(e, box)
  double min_step = 0.1;  // hop lengths log-uniform in [min_step, box]
};

// xi in B_g(e, box), xi' = xi o exp(v) with v drawn per PairSampling.
std::pair<HPoint, HPoint> sample_horizontal_pair(std::mt19937_64& rng, int n, const PairSampling& ps);

struct KppEstimate {
  double Kpp = 0.0;
  double R_min = 0.0;
  double R_max = 0.0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;  // excess below 1e-12
};

// Least K'' with 1 + 1/K'' <= R <= K'' + 1 over the sampled pairs.
KppEstimate estimate_Kpp(const HConvexFn& f, std::size_t n_pairs, std::uint64_t seed, const PairSampling& ps = {},
                         double tol = 1e-9);

struct EngulfingSampling {
  std::size_t n_sections = 200;  // (xi, s) pairs
  std::size_t n_inner = 8;       // xi' per section
  std::size_t n_probes = 16;     // zeta per xi' on the trace
  double box = 10.0;
  double s_min = 1e-3;
  double s_max = 1e3;
  std::uint64_t seed = 1;
};

struct EngulfingViolation {
  HPoint xi;
  double s = 0.0;
  HPoint xi_prime;
  HPoint witness;  // the probe zeta (equal to xi for diamond)
  double defect = 0.0;  // excess at xi' minus K s
};

struct EngulfingReport {
  double K = 0.0;
  double Kpp_est = 0.0;    // filled by callers that estimated it
  double K_derived = 0.0;  // 2 K'' (K'' + 1)
  std::vector<EngulfingViolation> violations;
  std::size_t checks = 0;
  std::size_t sections = 0;
};

EngulfingReport check_EHK(const HConvexFn& f, double K, const EngulfingSampling& es = {});
EngulfingReport check_diamond(const HConvexFn& f, double K, const EngulfingSampling& es = {});

// min over sampled horizontal pairs of (q - p) . D.
double check_h_monotone(const HConvexFn& f, std::size_t n_pairs, std::uint64_t seed, const PairSampling& ps = {});

// Columns xi_*, s, xip_*, w_*, defect.
void write_csv(std::ostream& os, const std::vector<EngulfingViolation>& v);

}  // namespace heis
