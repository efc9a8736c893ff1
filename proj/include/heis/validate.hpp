#pragma once

// The sqnorm closed-form example as an oracle, grid agreement campaigns and
// the staged consistency suite.

#include "heis/core.hpp"
#include "heis/engulfing.hpp"
#include "heis/funcs.hpp"
#include "heis/hnsections.hpp"
#include "heis/quasimetric.hpp"
#include "heis/sections.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace heis {

// Largest |t| in the closure of S^{H^n}(e, r) for sqnorm at horizontal
// distance rho: sqrt(3r + 2 rho sqrt(r) - rho^2) (sqrt(r) + rho), rho in [0, 3 sqrt(r)].
double closed_form_t_max(double r, double rho);

struct ProfilePoint {
  double theta = 0.0;
  HPoint point;
  double d = 0.0;  // sqrt(r) (1 + 2 cos theta)
  double t = 0.0;  // 4 r |sin theta| (1 + cos theta)
};

// Three hops of length sqrt(r) at angles 0, theta, 2 theta; theta in [-2pi/3, 0].
ProfilePoint eta(double r, double theta);

// Open H^n-section of sqnorm (any n): tilde-norm(center^{-1} p)^2 < s.
bool sqnorm_hn_contains_exact(const HPoint& center, double s, const HPoint& p);
ExactMembership sqnorm_membership();

// Euclidean distance in the (rho, t) half-plane from (rho, |t|) to the
// boundary curve t = closed_form_t_max(s, rho).
double distance_to_boundary(double s, double rho, double t);

struct GridSpec {
  double s = 1.0;
  int n_rho = 101;
  int n_t = 101;
  double rho_factor = 3.2;  // rho in [0, rho_factor sqrt(s)]
  double t_factor = 5.5;    // t in [0, t_factor s]
  double band = 1e-2;
};

std::vector<std::pair<double, double>> example_grid(const GridSpec& g);

struct GridDisagreement {
  double rho = 0.0;
  double t = 0.0;
  bool closed_form_in = false;
  bool search_in = false;
};

struct AgreementReport {
  std::size_t total = 0;
  std::size_t excluded = 0;  // inside the boundary band
  std::size_t compared = 0;
  std::size_t agree = 0;
  std::size_t closed_in = 0;
  double rate = 0.0;
  std::vector<GridDisagreement> disagreements;
};

// sqnorm, n = 1, center e: closed form vs hn_contains at the points (rho, 0, t).
AgreementReport example_agreement(const std::vector<std::pair<double, double>>& points, double s, double band,
                                  const HnBudget& budget = {});
AgreementReport example_agreement(const GridSpec& g = {}, const HnBudget& budget = {});

// gnuplot commands drawing the profile CSV over the closed-form curve.
void write_plot_script(std::ostream& os, const std::string& csv_path, double s);

struct StageConstant {
  std::string name;
  double value = 0.0;
  std::string provenance;  // "exact" | "est" | "bracket"
};

enum class StageStatus { pass, fail, skipped, error };
const char* to_string(StageStatus s);

struct ChainStage {
  std::string name;
  StageStatus status = StageStatus::skipped;
  std::vector<StageConstant> constants;
  std::size_t violations = 0;
  std::string note;
  double seconds = 0.0;
};

struct ChainConfig {
  std::uint64_t seed = 1;
  std::size_t convexity_points = 100;
  std::size_t convexity_dirs = 20;
  std::vector<double> s_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::vector<double> r_grid = {0.0625, 0.25, 1.0, 4.0, 16.0};
  std::size_t random_centers = 3;  // besides the identity
  double center_box = 2.0;
  double round_decay = 10.0;   // round stage fails if the ratio varies by this factor over s_grid
  double round_floor = 1e-2;   // or drops below this
  double slope_growth = 10.0;  // slope stage fails if M/m varies by this factor over r_grid
  double slope_cap = 1e6;
  std::size_t kpp_pairs = 2000;
  EngulfingSampling engulfing = {};
  double K_hn = 16.0;
  HnEngulfingSampling hn = {};
  bool exact_oracle = true;  // use the closed form for sqnorm probes
  std::size_t dphi_pairs = 3;
  std::size_t triples = 20;
  QuasiOptions quasi = {QuasiOptions{1e-3, 1e12, HnBudget::quick()}};
};

struct ChainReport {
  std::string function;
  std::vector<ChainStage> stages;
  bool all_pass() const;
  const ChainStage* stage(const std::string& name) const;
};

ChainReport chain_suite(const HConvexFn& f, const ChainConfig& cfg = {});

}  // namespace heis
