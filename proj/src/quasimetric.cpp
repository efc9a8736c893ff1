#include "heis/quasimetric.hpp"

#include "heis/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace heis {

QuasiDistance d_phi(const HConvexFn& f, const HPoint& xi, const HPoint& xi_prime, const QuasiOptions& opts) {
  require_same_dim(xi, xi_prime, "d_phi");
  if (!(opts.rel_tol > 0.0)) throw DomainError("d_phi: rel_tol must be positive");
  QuasiDistance d;
  if (xi.x == xi_prime.x && xi.y == xi_prime.y && xi.t == xi_prime.t) return d;

  // Both searches are run once; "mutual membership at height s" is then
  // "both best chains have height below s", which is monotone in s.
  const HnHeight fwd = hn_min_height(f, xi, xi_prime, opts.budget);
  const HnHeight bwd = hn_min_height(f, xi_prime, xi, opts.budget);
  const double h = std::max(fwd.height, bwd.height);
  if (!std::isfinite(h)) throw NumericalFailure("d_phi: no chain found between " + to_string(xi) + " and " + to_string(xi_prime));
  auto mutual = [&](double s) {
    ++d.queries;
    return h < s;
  };

  double lo, hi;
  if (mutual(1.0)) {
    hi = 1.0;
    lo = 0.5;
    while (mutual(lo)) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw NumericalFailure("d_phi: bracket underflow");
    }
  } else {
    lo = 1.0;
    hi = 2.0;
    while (!mutual(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > opts.cap) throw NumericalFailure("d_phi: bracket cap exceeded");
    }
  }
  while (hi - lo > 0.5 * opts.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mutual(mid)) hi = mid;
    else lo = mid;
  }
  d.s_lo = lo;
  d.s_hi = hi;
  d.value = hi;
  d.forward = fwd.witness;
  d.backward = bwd.witness;
  return d;
}

TriangleEstimate quasi_triangle_constant(const HConvexFn& f, std::size_t n_triples, std::uint64_t seed, double box,
                                         const QuasiOptions& opts) {
  if (n_triples == 0) throw DomainError("quasi_triangle_constant: n_triples must be positive");
  const int n = f.dim();
  struct Row {
    double ratio = -1.0;
    HPoint a, b, c;
  };
  std::vector<Row> rows(n_triples);
  parallel_for(n_triples, [&](std::size_t i) {
    auto rng = stream(seed, i);
    const HPoint xi = random_in_gauge_ball(rng, n, box);
    const HPoint eta = group_mul(xi, random_in_gauge_ball(rng, n, log_uniform(rng, 0.05, box)));
    const HPoint zeta = group_mul(eta, random_in_gauge_ball(rng, n, log_uniform(rng, 0.05, box)));
    const double d_xz = d_phi(f, xi, zeta, opts).value;
    const double d_xe = d_phi(f, xi, eta, opts).value;
    const double d_ez = d_phi(f, eta, zeta, opts).value;
    if (d_xe == 0.0 || d_ez == 0.0) return;
    rows[i] = {d_xz / (d_xe + d_ez), xi, eta, zeta};
  });
  TriangleEstimate est;
  for (const Row& r : rows) {
    if (r.ratio < 0.0) {
      ++est.skipped;
      continue;
    }
    ++est.triples;
    if (r.ratio > est.H_est) {
      est.H_est = r.ratio;
      est.worst_xi = r.a;
      est.worst_eta = r.b;
      est.worst_zeta = r.c;
    }
  }
  return est;
}

bool ball_contains(const HConvexFn& f, const HPoint& xi, double r, const HPoint& xi_prime, const QuasiOptions& opts) {
  if (!(r > 0.0)) throw DomainError("ball_contains: r must be positive");
  return d_phi(f, xi, xi_prime, opts).value < r;
}

SandwichReport ball_sandwich_check(const HConvexFn& f, const HPoint& xi, double r, double H_est, std::size_t probes,
                                   std::uint64_t seed, const QuasiOptions& opts) {
  if (!(r > 0.0) || !(H_est > 0.0)) throw DomainError("ball_sandwich_check: r and H_est must be positive");
  struct Row {
    bool right_tested = false;
    std::vector<SandwichDefect> left, right;
  };
  std::vector<Row> rows(probes);
  parallel_for(probes, [&](std::size_t i) {
    auto rng = stream(seed, i);
    const HPoint inner = sample_hn_point(f, xi, r / (2.0 * H_est), rng).point;
    const double d_in = d_phi(f, xi, inner, opts).value;
    if (!(d_in < r)) rows[i].left.push_back({inner, d_in});

    const HPoint cand = sample_hn_point(f, xi, r, rng).point;
    if (d_phi(f, xi, cand, opts).value < r) {
      rows[i].right_tested = true;
      const HnMembership m = hn_contains(f, xi, r, cand, opts.budget);
      if (!m.in()) rows[i].right.push_back({cand, m.best_height});
    }
  });
  SandwichReport rep;
  rep.left_checked = probes;
  for (auto& row : rows) {
    rep.right_checked += row.right_tested ? 1 : 0;
    for (auto& d : row.left) rep.left_defects.push_back(std::move(d));
    for (auto& d : row.right) rep.right_defects.push_back(std::move(d));
  }
  return rep;
}

std::vector<std::vector<QuasiDistance>> distance_matrix(const HConvexFn& f, const std::vector<HPoint>& points,
                                                        const QuasiOptions& opts) {
  const std::size_t m = points.size();
  std::vector<std::vector<QuasiDistance>> d(m, std::vector<QuasiDistance>(m));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    d[i][j] = d_phi(f, points[i], points[j], opts);
  });
  for (const auto& [i, j] : pairs) {
    d[j][i] = d[i][j];
    std::swap(d[j][i].forward, d[j][i].backward);
  }
  return d;
}

void write_distance_csv(std::ostream& os, const std::vector<HPoint>& points,
                        const std::vector<std::vector<QuasiDistance>>& d) {
  os << "row,col,value,s_lo,s_hi\n";
  char buf[128];
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", i, j, d[i][j].value, d[i][j].s_lo, d[i][j].s_hi);
      os << buf;
    }
}

}  // namespace heis
