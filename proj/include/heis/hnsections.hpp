#pragma once

// Three-hop H^n-sections: witness search, verification and reversal,
// E(H^n,K) sampling, the triple-union inclusions and boundary profiles.

#include "heis/core.hpp"
#include "heis/funcs.hpp"
#include "heis/sections.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <string_view>
#include <vector>

namespace heis {

// xi0 -> xi1 -> xi2 -> xi', each hop inside the H-section of its start.
struct Witness {
  HPoint xi1;
  HPoint xi2;
  std::array<double, 3> hop_excess{};
};

enum class Verdict { in, out_at_resolution };

const char* to_string(Verdict v);

struct BudgetUse {
  std::size_t hop1_candidates = 0;
  std::size_t trace_evals = 0;
  std::size_t refine_moves = 0;
};

struct HnBudget {
  int hop1_dirs = 64;
  int hop1_radii = 16;
  int trace_samples = 128;
  int refine_rounds = 3;   // pattern-search passes around the best near misses
  int refine_seeds = 4;
  int refine_moves = 400;  // cap on accepted + rejected pattern moves per seed

  static HnBudget quick();
  static HnBudget standard();
  static HnBudget thorough();
  // "quick" | "default" | "thorough"
  static HnBudget preset(std::string_view name);
};

struct HnMembership {
  Verdict verdict = Verdict::out_at_resolution;
  Witness witness;  // meaningful for Verdict::in
  double best_height = std::numeric_limits<double>::infinity();  // max hop excess of the best chain found
  BudgetUse used;

  bool in() const { return verdict == Verdict::in; }
};

// Is xi' in the open H^n-section of height s at xi0? IN is certified by a
// verified witness; OUT means no witness was found within the budget.
HnMembership hn_contains(const HConvexFn& f, const HPoint& xi0, double s, const HPoint& xi_prime,
                         const HnBudget& budget = {});

struct HnHeight {
  double height = std::numeric_limits<double>::infinity();  // least max hop excess found
  Witness witness;
  BudgetUse used;
};

// Smallest height at which the search finds a chain from xi0 to xi'.
HnHeight hn_min_height(const HConvexFn& f, const HPoint& xi0, const HPoint& xi_prime, const HnBudget& budget = {});

bool verify_witness(const HConvexFn& f, const HPoint& xi0, double s, const HPoint& xi_prime, const Witness& w,
                    double tol = 1e-9);

struct ReversedWitness {
  bool ok = false;
  Witness witness;   // chain xi' -> xi2 -> xi1 -> xi0
  int failing_hop = -1;
  double defect = 0.0;  // reversed hop excess minus K' s for the failing hop
};

ReversedWitness reverse_witness(const HConvexFn& f, const HPoint& xi0, double s, const HPoint& xi_prime,
                                const Witness& w, double Kp);

// A point of S^{H^n}(center, s) drawn as three random hops, each a uniform
// fraction of the section radius in a random direction.
struct SampledHnPoint {
  HPoint point;
  Witness witness;
};
SampledHnPoint sample_hn_point(const HConvexFn& f, const HPoint& center, double s, std::mt19937_64& rng);

// Exact membership test for the open H^n-section, when one is known.
using ExactMembership = std::function<bool(const HPoint& center, double s, const HPoint& p)>;

struct HnEngulfingSampling {
  std::size_t n_sections = 12;
  std::size_t n_inner = 4;
  std::size_t n_probes = 8;
  double box = 5.0;
  double s_min = 0.1;
  double s_max = 10.0;
  std::uint64_t seed = 1;
  HnBudget budget = HnBudget::quick();
};

struct HnProbe {
  HPoint xi;
  double s = 0.0;
  HPoint xi_prime;
  HPoint zeta;
  double best_height = 0.0;  // search only
};

struct HnEngulfingReport {
  double K = 0.0;
  std::vector<HnProbe> violations;    // definite (exact membership says OUT)
  std::vector<HnProbe> inconclusive;  // search found no witness
  std::size_t checks = 0;
  std::size_t certified = 0;
};

HnEngulfingReport check_E_HnK(const HConvexFn& f, double K, const HnEngulfingSampling& hs = {},
                              const ExactMembership& exact = {});

struct TripleUnionDefect {
  HPoint point;
  double amount = 0.0;
};

struct TripleUnionReport {
  std::size_t checked_a = 0;
  std::size_t checked_b = 0;
  std::vector<TripleUnionDefect> defects_a;  // three m-hops outside the tilde ball
  std::vector<TripleUnionDefect> defects_b;  // tilde-ball point whose hops exceed M
};

TripleUnionReport triple_union_inclusion(const HConvexFn& f, const HPoint& xi, double r, std::size_t samples,
                                         std::uint64_t seed);

struct ProfileRow {
  double rho = 0.0;
  double t_sup = 0.0;
};

// n = 1: for each rho, the IN/OUT transition of hn_contains along
// xi0 o (rho, 0, sign * t), t >= 0.
std::vector<ProfileRow> hn_boundary_profile(const HConvexFn& f, const HPoint& xi0, double s,
                                            const std::vector<double>& rho_grid, const HnBudget& budget = {},
                                            double sign = 1.0, double t_tol = 1e-5);

// Columns rho, t_sup.
void write_csv(std::ostream& os, const std::vector<ProfileRow>& rows);

}  // namespace heis
