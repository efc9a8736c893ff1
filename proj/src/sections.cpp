#include "heis/sections.hpp"

#include "heis/numeric.hpp"
#include "heis/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace heis {

HSectionSpec HSectionSpec::at(const HConvexFn& f, const HPoint& center, double s) {
  if (!(s > 0.0)) throw DomainError("section height must be positive");
  return HSectionSpec{center, f.horizontal_gradient(center), s, f(center)};
}

double excess(const HConvexFn& f, const HPoint& center, const HorizontalVector& p, const HPoint& q, double tol) {
  require_same_dim(center, q, "excess");
  const HorizontalVector d = project(q) - project(center);
  const double scale = 1.0 + std::abs(center.t) + std::abs(q.t) + std::pow(project(center).norm() + d.norm(), 2);
  if (std::abs(plane_residual(center, q)) > tol * scale)
    throw DomainError("excess: point " + to_string(q) + " is not on the horizontal plane of " + to_string(center));
  return f(q) - f(center) - p.dot(d);
}

double excess_v(const HConvexFn& f, const HSectionSpec& spec, const HorizontalVector& v) {
  return f(exp_horizontal(spec.center, v)) - spec.f_center - spec.p.dot(v);
}

double h_section_radius(const HConvexFn& f, const HSectionSpec& spec, const HorizontalVector& u,
                        const RadiusOptions& opts) {
  if (std::abs(u.norm() - 1.0) > 1e-9) throw DomainError("h_section_radius: direction must be a unit vector");
  const double s = spec.s;
  auto g = [&](double rho) { return excess_v(f, spec, u * rho); };
  auto slack = [&](double val) { return opts.mono_tol * (1.0 + std::abs(val) + s); };

  double lo = 0.0, hi = 1.0;
  double g_lo = 0.0;
  double g_hi = g(hi);
  if (g_hi < -slack(g_hi))
    throw NumericalFailure("h_section_radius: negative excess " + std::to_string(g_hi) + " (input not H-convex?)");
  while (g_hi < s) {
    lo = hi;
    g_lo = g_hi;
    hi *= 2.0;
    if (hi > opts.cap) return kUnbounded;
    g_hi = g(hi);
    if (g_hi < g_lo - slack(g_lo))
      throw NumericalFailure("h_section_radius: excess decreases along the ray (input not H-convex?)");
  }
  while (hi - lo > opts.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm < s) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

bool RadialBoundary::bounded() const {
  return std::none_of(radii.begin(), radii.end(), [](double r) { return std::isinf(r); });
}

double RadialBoundary::min_radius() const { return *std::min_element(radii.begin(), radii.end()); }
double RadialBoundary::max_radius() const { return *std::max_element(radii.begin(), radii.end()); }

RadialBoundary h_section_boundary(const HConvexFn& f, const HSectionSpec& spec, int n_dirs,
                                  const RadiusOptions& opts) {
  if (n_dirs < 4) throw DomainError("h_section_boundary: need at least 4 directions");
  RadialBoundary b;
  b.directions = sphere_directions(spec.center.dim(), n_dirs);
  b.radii.resize(b.directions.size());
  for (std::size_t i = 0; i < b.directions.size(); ++i) b.radii[i] = h_section_radius(f, spec, b.directions[i], opts);
  return b;
}

void write_csv(std::ostream& os, const RadialBoundary& b) {
  const int d = b.directions.empty() ? 0 : 2 * b.directions.front().dim();
  for (int j = 0; j < d; ++j) os << "dir_" << j + 1 << ",";
  os << "radius\n";
  char buf[32];
  for (std::size_t i = 0; i < b.directions.size(); ++i) {
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", b.directions[i].v[j]);
      os << buf << ",";
    }
    if (std::isinf(b.radii[i])) os << "inf\n";
    else {
      std::snprintf(buf, sizeof buf, "%.17g", b.radii[i]);
      os << buf << "\n";
    }
  }
}

namespace {

HorizontalVector rotate_towards(const HorizontalVector& u, const HorizontalVector& w, double angle) {
  return u * std::cos(angle) + w * std::sin(angle);
}

// Local refinement on the sphere for n > 1: golden search of the angle in
// the plane of u and each coordinate axis, with shrinking windows.
HorizontalVector refine_on_sphere(const std::function<double(const HorizontalVector&)>& g, HorizontalVector u,
                                  double window, int iters) {
  const int d = 2 * u.dim();
  double best = g(u);
  for (int round = 0; round < 4; ++round) {
    for (int j = 0; j < d; ++j) {
      HorizontalVector e(u.dim());
      e.v[j] = 1.0;
      HorizontalVector w = e - u * u.dot(e);
      if (w.norm() < 1e-12) continue;
      w = w * (1.0 / w.norm());
      const auto res = numeric::golden_min([&](double a) { return g(rotate_towards(u, w, a)); }, -window, window,
                                           iters, 1e-10);
      if (res.fx < best) {
        best = res.fx;
        u = rotate_towards(u, w, res.x);
        u = u * (1.0 / u.norm());
      }
    }
    window *= 0.25;
  }
  return u;
}

}  // namespace

SlopeProfile m_M(const HConvexFn& f, const HPoint& xi, double r, const SlopeOptions& opts) {
  if (!(r > 0.0)) throw DomainError("m_M: r must be positive");
  const HSectionSpec spec = HSectionSpec::at(f, xi, 1.0);
  const int n = xi.dim();
  SlopeProfile prof;
  prof.xi = xi;
  prof.r = r;
  auto ex = [&](const HorizontalVector& u) { return excess_v(f, spec, u * r); };

  if (n == 1) {
    const int count = opts.n_dirs > 0 ? opts.n_dirs : 720;
    const double step = 2.0 * std::numbers::pi / count;
    auto at = [&](double th) { return ex(HorizontalVector{std::cos(th), std::sin(th)}); };
    int imin = 0, imax = 0;
    double vmin = at(0.0), vmax = vmin;
    for (int k = 1; k < count; ++k) {
      const double v = at(k * step);
      if (v < vmin) vmin = v, imin = k;
      if (v > vmax) vmax = v, imax = k;
    }
    const auto lo = numeric::golden_min(at, (imin - 1) * step, (imin + 1) * step, opts.refine_iters, 1e-12);
    const auto hi = numeric::golden_min([&](double th) { return -at(th); }, (imax - 1) * step, (imax + 1) * step,
                                        opts.refine_iters, 1e-12);
    const double th_min = lo.fx < vmin ? lo.x : imin * step;
    const double th_max = -hi.fx > vmax ? hi.x : imax * step;
    prof.m = std::min(vmin, lo.fx);
    prof.M = std::max(vmax, -hi.fx);
    prof.argmin = HorizontalVector{std::cos(th_min), std::sin(th_min)};
    prof.argmax = HorizontalVector{std::cos(th_max), std::sin(th_max)};
    return prof;
  }

  const int count = opts.n_dirs > 0 ? opts.n_dirs : 2000;
  const auto dirs = sphere_directions(n, count);
  std::size_t imin = 0, imax = 0;
  double vmin = ex(dirs[0]), vmax = vmin;
  for (std::size_t k = 1; k < dirs.size(); ++k) {
    const double v = ex(dirs[k]);
    if (v < vmin) vmin = v, imin = k;
    if (v > vmax) vmax = v, imax = k;
  }
  const double window = std::sqrt(8.0 / count);
  const int iters = std::min(opts.refine_iters, 60);
  prof.argmin = refine_on_sphere(ex, dirs[imin], window, iters);
  prof.argmax = refine_on_sphere([&](const HorizontalVector& u) { return -ex(u); }, dirs[imax], window, iters);
  prof.m = std::min(vmin, ex(prof.argmin));
  prof.M = std::max(vmax, ex(prof.argmax));
  return prof;
}

RoundConstants round_constants(const HConvexFn& f, const HPoint& xi, double s, int n_dirs) {
  const RadialBoundary b = h_section_boundary(f, HSectionSpec::at(f, xi, s), n_dirs);
  if (!b.bounded()) throw NumericalFailure("round_constants: section is unbounded");
  RoundConstants rc;
  rc.R_in = b.min_radius();
  rc.R_out = b.max_radius();
  rc.ratio = rc.R_in / rc.R_out;
  return rc;
}

namespace {

std::vector<HPoint> sample_centers(int n, std::size_t count, std::uint64_t seed, double box) {
  std::vector<HPoint> centers;
  centers.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = stream(seed, i);
    centers.push_back(random_in_gauge_ball(rng, n, box));
  }
  return centers;
}

void require_positive_m(const SlopeProfile& p) {
  if (!(p.m > 0.0))
    throw NumericalFailure("m = " + std::to_string(p.m) + " at " + to_string(p.xi) + ", r = " + std::to_string(p.r) +
                           " (affine or degenerate direction)");
}

}  // namespace

SlopeConstant slope_constant(const HConvexFn& f, const std::vector<HPoint>& centers,
                             const std::vector<double>& r_grid, const SlopeOptions& opts) {
  if (centers.empty() || r_grid.empty()) throw DomainError("slope_constant: empty sample");
  SlopeConstant out;
  out.r_grid = r_grid;
  out.max_ratio.assign(r_grid.size(), 0.0);
  std::vector<std::vector<double>> ratios(centers.size(), std::vector<double>(r_grid.size()));
  parallel_for(centers.size(), [&](std::size_t i) {
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      const SlopeProfile p = m_M(f, centers[i], r_grid[k], opts);
      require_positive_m(p);
      ratios[i][k] = p.M / p.m;
    }
  });
  for (const auto& row : ratios)
    for (std::size_t k = 0; k < row.size(); ++k) out.max_ratio[k] = std::max(out.max_ratio[k], row[k]);
  out.K1_est = *std::max_element(out.max_ratio.begin(), out.max_ratio.end());
  out.samples = centers.size() * r_grid.size();
  return out;
}

SlopeConstant slope_constant(const HConvexFn& f, std::size_t n_samples, const std::vector<double>& r_grid,
                             std::uint64_t seed, double box, const SlopeOptions& opts) {
  return slope_constant(f, sample_centers(f.dim(), n_samples, seed, box), r_grid, opts);
}

DoublingReport doubling_report(const HConvexFn& f, const std::vector<HPoint>& centers,
                               const std::vector<double>& r_grid, int max_gamma, const SlopeOptions& opts) {
  if (centers.empty() || r_grid.empty()) throw DomainError("doubling_report: empty sample");
  struct Row {
    double B1 = 0.0, B2 = 0.0, B4 = std::numeric_limits<double>::infinity();
    int gamma = 0;  // least g with M(r) <= m(2^g r), max over the r grid; -1 if none <= max_gamma
  };
  std::vector<Row> rows(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) {
    Row& row = rows[i];
    for (double r : r_grid) {
      const SlopeProfile p1 = m_M(f, centers[i], r, opts);
      const SlopeProfile p2 = m_M(f, centers[i], 2.0 * r, opts);
      require_positive_m(p1);
      require_positive_m(p2);
      row.B1 = std::max(row.B1, p2.M / p1.M);
      row.B2 = std::max(row.B2, p2.m / p1.m);
      row.B4 = std::min(row.B4, p2.m / p1.m);
      // m(xi, .) is increasing, so the first g that works is the least one.
      int g = 1;
      double m_g = p2.m;
      while (p1.M > m_g && g < max_gamma) {
        ++g;
        m_g = m_M(f, centers[i], std::ldexp(r, g), opts).m;
      }
      if (p1.M > m_g || row.gamma < 0) row.gamma = -1;
      else row.gamma = std::max(row.gamma, g);
    }
  });
  DoublingReport rep;
  rep.B4_est = std::numeric_limits<double>::infinity();
  rep.gamma_est = 1;
  for (const Row& row : rows) {
    rep.B1_est = std::max(rep.B1_est, row.B1);
    rep.B2_est = std::max(rep.B2_est, row.B2);
    rep.B4_est = std::min(rep.B4_est, row.B4);
    if (row.gamma < 0 || rep.gamma_est < 0) rep.gamma_est = -1;
    else rep.gamma_est = std::max(rep.gamma_est, row.gamma);
  }
  rep.samples = centers.size() * r_grid.size();
  return rep;
}

DoublingReport doubling_report(const HConvexFn& f, std::size_t n_samples, const std::vector<double>& r_grid,
                               std::uint64_t seed, double box, int max_gamma, const SlopeOptions& opts) {
  return doubling_report(f, sample_centers(f.dim(), n_samples, seed, box), r_grid, max_gamma, opts);
}

MonotoneReport verify_m_monotone(const HConvexFn& f, const HPoint& xi, const std::vector<double>& r_grid, double tol,
                                 const SlopeOptions& opts) {
  MonotoneReport rep;
  std::vector<double> grid = r_grid;
  std::sort(grid.begin(), grid.end());
  for (double r : grid) rep.m.push_back(m_M(f, xi, r, opts).m);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (rep.m[i] <= rep.m[i - 1] - tol * (1.0 + std::abs(rep.m[i - 1]))) {
      rep.monotone = false;
      rep.defects.push_back({grid[i - 1], grid[i], rep.m[i - 1], rep.m[i]});
    }
  }
  return rep;
}

}  // namespace heis
