#pragma once

// H-sections inside horizontal planes, the m/M slope functionals and the
// constants estimated from them.

#include "heis/core.hpp"
#include "heis/funcs.hpp"

#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

namespace heis {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// S^H(center, p, s) = {center o exp v : excess < s}
struct HSectionSpec {
  HPoint center;
  HorizontalVector p;
  double s = 1.0;
  double f_center = 0.0;

  // Single-gradient mode: p is the horizontal gradient at the center.
  static HSectionSpec at(const HConvexFn& f, const HPoint& center, double s);
};

// f(q) - f(center) - p . (Pr1(q) - Pr1(center)), q on H_center.
double excess(const HConvexFn& f, const HPoint& center, const HorizontalVector& p, const HPoint& q,
              double tol = 1e-9);
// Same with q = center o exp(v); no plane check needed.
double excess_v(const HConvexFn& f, const HSectionSpec& spec, const HorizontalVector& v);

struct RadiusOptions {
  double rel_tol = 1e-10;
  double cap = 1e9;        // beyond this the ray is reported UNBOUNDED
  double mono_tol = 1e-9;  // allowed decrease of the excess along the ray (relative)
};

// Root of excess(center o exp(rho u)) = s; kUnbounded past the cap.
double h_section_radius(const HConvexFn& f, const HSectionSpec& spec, const HorizontalVector& u,
                        const RadiusOptions& opts = {});

struct RadialBoundary {
  std::vector<HorizontalVector> directions;
  std::vector<double> radii;

  bool bounded() const;
  double min_radius() const;
  double max_radius() const;
};

RadialBoundary h_section_boundary(const HConvexFn& f, const HSectionSpec& spec, int n_dirs,
                                  const RadiusOptions& opts = {});

// Columns dir_1..dir_2n, radius.
void write_csv(std::ostream& os, const RadialBoundary& b);

struct SlopeOptions {
  int n_dirs = 0;  // 0: 720 for n = 1, 2000 otherwise
  int refine_iters = 200;
};

struct SlopeProfile {
  HPoint xi;
  double r = 0.0;
  double m = 0.0;
  double M = 0.0;
  HorizontalVector argmin;
  HorizontalVector argmax;
};

// Min and max of the excess at xi over {xi o exp v : |v| = r}.
SlopeProfile m_M(const HConvexFn& f, const HPoint& xi, double r, const SlopeOptions& opts = {});

struct RoundConstants {
  double R_in = 0.0;
  double R_out = 0.0;
  double ratio = 0.0;
};

RoundConstants round_constants(const HConvexFn& f, const HPoint& xi, double s, int n_dirs = 720);

struct SlopeConstant {
  double K1_est = 0.0;
  std::vector<double> r_grid;
  std::vector<double> max_ratio;  // per r, max over centers of M/m
  std::size_t samples = 0;
};

SlopeConstant slope_constant(const HConvexFn& f, const std::vector<HPoint>& centers,
                             const std::vector<double>& r_grid, const SlopeOptions& opts = {});
SlopeConstant slope_constant(const HConvexFn& f, std::size_t n_samples, const std::vector<double>& r_grid,
                             std::uint64_t seed, double box = 10.0, const SlopeOptions& opts = {});

struct DoublingReport {
  double B1_est = 0.0;
  double B2_est = 0.0;
  double B4_est = 0.0;
  int gamma_est = -1;  // -1: no gamma <= max_gamma worked
  std::size_t samples = 0;
};

DoublingReport doubling_report(const HConvexFn& f, const std::vector<HPoint>& centers,
                               const std::vector<double>& r_grid, int max_gamma = 16,
                               const SlopeOptions& opts = {});
DoublingReport doubling_report(const HConvexFn& f, std::size_t n_samples, const std::vector<double>& r_grid,
                               std::uint64_t seed, double box = 10.0, int max_gamma = 16,
                               const SlopeOptions& opts = {});

struct MonotoneDefect {
  double r0, r1, m0, m1;
};

struct MonotoneReport {
  bool monotone = true;
  std::vector<double> m;
  std::vector<MonotoneDefect> defects;
};

MonotoneReport verify_m_monotone(const HConvexFn& f, const HPoint& xi, const std::vector<double>& r_grid,
                                 double tol = 1e-12, const SlopeOptions& opts = {});

struct ConstantsReport {
  double K0_est = 0.0;
  double K1_est = 0.0;
  double B1_est = 0.0;
  double B2_est = 0.0;
  double B4_est = 0.0;
  int gamma_est = -1;
  std::size_t samples = 0;
};

}  // namespace heis
