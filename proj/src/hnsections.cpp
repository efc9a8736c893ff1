#include "heis/hnsections.hpp"

#include "heis/numeric.hpp"
#include "heis/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace heis {

const char* to_string(Verdict v) { return v == Verdict::in ? "IN" : "OUT_AT_RESOLUTION"; }

HnBudget HnBudget::quick() {
  HnBudget b;
  b.hop1_dirs = 32;
  b.hop1_radii = 8;
  b.trace_samples = 64;
  b.refine_rounds = 2;
  b.refine_seeds = 2;
  b.refine_moves = 200;
  return b;
}

HnBudget HnBudget::standard() { return HnBudget{}; }

HnBudget HnBudget::thorough() {
  HnBudget b;
  b.hop1_dirs *= 8;
  b.hop1_radii *= 8;
  b.trace_samples *= 8;
  b.refine_rounds *= 8;
  b.refine_seeds *= 8;
  b.refine_moves *= 8;
  return b;
}

HnBudget HnBudget::preset(std::string_view name) {
  if (name == "quick") return quick();
  if (name == "default") return standard();
  if (name == "thorough") return thorough();
  throw DomainError("unknown budget preset '" + std::string(name) + "' (quick | default | thorough)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};

struct Chain {
  double F = kInf;
  HorizontalVector v1;
  HorizontalVector v2;
};

class Search {
 public:
  Search(const HConvexFn& f, const HPoint& xi0, const HPoint& xp, const HnBudget& budget)
      : f_(f), xi0_(xi0), xp_(xp), b_(budget), n_(xi0.dim()) {
    require_same_dim(xi0, xp, "hn search");
    f0_ = f(xi0);
    p0_ = f.horizontal_gradient(xi0);
    fp_ = f(xp);
    zp_ = project(xp);
  }

  BudgetUse used;

  double hop1(const HorizontalVector& v1) const { return f_(exp_horizontal(xi0_, v1)) - f0_ - p0_.dot(v1); }

  // Chain through the given hops, with v3 closing the gap to xi'.
  Chain direct(const HorizontalVector& v1, const HorizontalVector& v2) {
    const HPoint xi1 = exp_horizontal(xi0_, v1);
    const double f1 = f_(xi1);
    const double e1 = f1 - f0_ - p0_.dot(v1);
    const HPoint xi2 = exp_horizontal(xi1, v2);
    const double f2 = f_(xi2);
    const double e2 = f2 - f1 - f_.horizontal_gradient(xi1).dot(v2);
    const double e3 = fp_ - f2 - f_.horizontal_gradient(xi2).dot(zp_ - project(xi2));
    return Chain{std::max({e1, e2, e3}), v1, v2};
  }

  // Best hop 2 for a fixed hop 1; hop 2 ranges over the trace of H_xi' in H_xi1.
  Chain inner(const HorizontalVector& v1, double bound, int samples) {
    ++used.hop1_candidates;
    const HPoint xi1 = exp_horizontal(xi0_, v1);
    const double f1 = f_(xi1);
    const double e1 = f1 - f0_ - p0_.dot(v1);
    if (!(e1 < bound)) return Chain{kInf, v1, HorizontalVector(n_)};
    const PlaneTrace tr = plane_trace(xi1, xp_);
    if (tr.kind == TraceKind::identical) return Chain{e1, v1, HorizontalVector(n_)};
    if (tr.kind == TraceKind::empty) return Chain{kInf, v1, HorizontalVector(n_)};
    const HorizontalVector p1 = f_.horizontal_gradient(xi1);

    double cut = bound;  // G values above this cannot improve the chain
    auto G = [&](const HorizontalVector& v2) {
      ++used.trace_evals;
      const HPoint xi2 = exp_horizontal(xi1, v2);
      const double f2 = f_(xi2);
      const double e2 = f2 - f1 - p1.dot(v2);
      if (!(e2 < cut)) return e2;
      const double e3 = fp_ - f2 - f_.horizontal_gradient(xi2).dot(zp_ - project(xi2));
      return std::max(e2, e3);
    };
    const HorizontalVector c = tr.closest_point();
    const double scale = 1e-3 + c.norm() + (zp_ - project(xi1)).norm();

    if (n_ == 1) {
      const double nn = tr.normal.norm();
      const HorizontalVector w{-tr.normal.v[1] / nn, tr.normal.v[0] / nn};
      auto g1 = [&](double tau) { return G(c + w * tau); };
      double T = 0.5 * scale;
      for (int k = 0; k < 60 && (g1(T) < bound || g1(-T) < bound); ++k) T *= 2.0;
      const auto m = numeric::scan_then_golden(g1, -T, T, samples, 80, 1e-12);
      return Chain{std::max(e1, m.fx), v1, c + w * m.x};
    }

    // n > 1: the trace is a hyperplane; Householder basis of its directions.
    const int d = 2 * n_;
    Eigen::VectorXd nrm = Eigen::Map<const Eigen::VectorXd>(tr.normal.v.data(), d) / tr.normal.norm();
    Eigen::VectorXd hv = nrm;
    hv[0] += nrm[0] >= 0.0 ? 1.0 : -1.0;
    hv.normalize();
    const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d) - 2.0 * hv * hv.transpose();
    std::vector<HorizontalVector> basis;
    for (int j = 1; j < d; ++j) basis.emplace_back(Vec2N(H.col(j)));
    auto point = [&](const Eigen::VectorXd& z) {
      HorizontalVector v = c;
      for (int j = 0; j < d - 1; ++j) v = v + basis[static_cast<size_t>(j)] * z[j];
      return v;
    };
    double T = 0.5 * scale;
    for (int k = 0; k < 60; ++k) {
      bool inside = false;
      for (const auto& bv : basis) inside = inside || G(c + bv * T) < bound || G(c - bv * T) < bound;
      if (!inside) break;
      T *= 2.0;
    }
    Eigen::VectorXd best_z = Eigen::VectorXd::Zero(d - 1);
    double best = G(c);
    Eigen::VectorXd z(d - 1);
    for (int k = 1; k <= 2 * samples; ++k) {
      for (int j = 0; j < d - 1; ++j) z[j] = T * (2.0 * radical_inverse(static_cast<std::uint64_t>(k), kPrimes[j]) - 1.0);
      const double g = G(point(z));
      if (g < best) best = g, best_z = z;
    }
    // compass search
    double step = 0.25 * T;
    for (int it = 0; it < 200 && step > 1e-9 * scale; ++it) {
      bool moved = false;
      for (int j = 0; j < d - 1 && !moved; ++j) {
        for (double sg : {1.0, -1.0}) {
          z = best_z;
          z[j] += sg * step;
          const double g = G(point(z));
          if (g < best) {
            best = g, best_z = z, moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    return Chain{std::max(e1, best), v1, point(best_z)};
  }

  // s_cap bounds the hop-1 grid; the search stops as soon as a chain of
  // height below stop_below is found; refinement runs when the coarse best
  // is below refine_gate.
  Chain run(double s_cap, double stop_below, double refine_gate, const Chain& seed) {
    Chain best = seed;
    if (best.F < stop_below) return best;
    std::vector<Chain> top{seed};
    auto consider = [&](const Chain& c) {
      if (c.F < best.F) best = c;
      if (!std::isfinite(c.F)) return;
      top.push_back(c);
      std::sort(top.begin(), top.end(), [](const Chain& a, const Chain& b) { return a.F < b.F; });
      if (static_cast<int>(top.size()) > b_.refine_seeds) top.resize(static_cast<size_t>(b_.refine_seeds));
    };

    consider(inner(HorizontalVector(n_), best.F, b_.trace_samples));
    const HSectionSpec spec = HSectionSpec::at(f_, xi0_, s_cap);
    double r_max = 0.0;
    for (const auto& u : sphere_directions(n_, b_.hop1_dirs)) {
      if (best.F < stop_below) return best;
      double R = h_section_radius(f_, spec, u);
      if (std::isinf(R)) R = 1e6;
      r_max = std::max(r_max, R);
      for (int k = 0; k < b_.hop1_radii; ++k) {
        consider(inner(u * (R * (k + 0.5) / b_.hop1_radii), best.F, b_.trace_samples));
        if (best.F < stop_below) return best;
      }
    }
    if (!(best.F < refine_gate)) return best;

    // Pattern search over hop 1 around the best near misses.
    std::vector<HorizontalVector> stencil;
    if (n_ == 1) {
      for (int k = 0; k < 8; ++k)
        stencil.push_back(HorizontalVector{std::cos(k * std::numbers::pi / 4), std::sin(k * std::numbers::pi / 4)});
    } else {
      for (int j = 0; j < 2 * n_; ++j) {
        HorizontalVector e(n_);
        e.v[j] = 1.0;
        stencil.push_back(e);
        stencil.push_back(-e);
      }
    }
    const double step0 = std::max(r_max, 1e-12) / b_.hop1_radii;
    const std::vector<Chain> seeds = top;
    for (const Chain& sd : seeds) {
      Chain cur = sd;
      for (int round = 0; round < b_.refine_rounds; ++round) {
        double step = step0 / (1 << round);
        int moves = 0;
        while (step > 1e-7 * step0 && moves < b_.refine_moves) {
          bool moved = false;
          for (const auto& dir : stencil) {
            ++moves;
            ++used.refine_moves;
            const Chain c = inner(cur.v1 + dir * step, cur.F, b_.trace_samples);
            if (c.F < cur.F) {
              cur = c;
              moved = true;
              break;
            }
          }
          if (cur.F < best.F) best = cur;
          if (best.F < stop_below) return best;
          if (!moved) step *= 0.5;
        }
        // tightened trace search at the current hop 1
        const Chain c = inner(cur.v1, kInf, 4 * b_.trace_samples);
        if (c.F < cur.F) cur = c;
        if (cur.F < best.F) best = cur;
        if (best.F < stop_below) return best;
      }
    }
    return best;
  }

  Chain seed() {
    const Decomposition3 d = decompose3(group_mul(group_inv(xi0_), xp_), DecomposeStrategy::minmax);
    Chain c = direct(d.v1, d.v2);
    const Chain alt = inner(d.v1, kInf, b_.trace_samples);
    return alt.F < c.F ? alt : c;
  }

  Witness witness(const Chain& c) const {
    Witness w;
    w.xi1 = exp_horizontal(xi0_, c.v1);
    w.xi2 = exp_horizontal(w.xi1, c.v2);
    w.hop_excess[0] = f_(w.xi1) - f0_ - p0_.dot(c.v1);
    w.hop_excess[1] = f_(w.xi2) - f_(w.xi1) - f_.horizontal_gradient(w.xi1).dot(c.v2);
    w.hop_excess[2] = fp_ - f_(w.xi2) - f_.horizontal_gradient(w.xi2).dot(zp_ - project(w.xi2));
    return w;
  }

 private:
  const HConvexFn& f_;
  HPoint xi0_, xp_;
  HnBudget b_;
  int n_;
  double f0_ = 0.0, fp_ = 0.0;
  HorizontalVector p0_, zp_;
};

bool same_point(const HPoint& a, const HPoint& b) { return a.x == b.x && a.y == b.y && a.t == b.t; }

Witness trivial_witness(const HPoint& xi0) { return Witness{xi0, xi0, {0.0, 0.0, 0.0}}; }

double plane_scale(const HPoint& a, const HPoint& b) {
  return 1.0 + std::abs(a.t) + std::abs(b.t) + std::pow(project(a).norm() + project(b).norm(), 2);
}

}  // namespace

HnMembership hn_contains(const HConvexFn& f, const HPoint& xi0, double s, const HPoint& xi_prime,
                         const HnBudget& budget) {
  if (!(s > 0.0)) throw DomainError("hn_contains: s must be positive");
  require_same_dim(xi0, xi_prime, "hn_contains");
  HnMembership res;
  if (same_point(xi0, xi_prime)) {
    res.verdict = Verdict::in;
    res.witness = trivial_witness(xi0);
    res.best_height = 0.0;
    return res;
  }
  Search search(f, xi0, xi_prime, budget);
  const Chain best = search.run(s, s, 1.5 * s, search.seed());
  res.used = search.used;
  res.best_height = best.F;
  if (best.F < s) {
    const Witness w = search.witness(best);
    if (verify_witness(f, xi0, s, xi_prime, w)) {
      res.verdict = Verdict::in;
      res.witness = w;
    }
  }
  return res;
}

HnHeight hn_min_height(const HConvexFn& f, const HPoint& xi0, const HPoint& xi_prime, const HnBudget& budget) {
  require_same_dim(xi0, xi_prime, "hn_min_height");
  HnHeight out;
  if (same_point(xi0, xi_prime)) {
    out.height = 0.0;
    out.witness = trivial_witness(xi0);
    return out;
  }
  Search search(f, xi0, xi_prime, budget);
  const Chain seed = search.seed();
  const double cap = std::isfinite(seed.F) && seed.F > 0.0 ? seed.F : 1.0;
  const Chain best = search.run(cap, -kInf, kInf, seed);
  out.used = search.used;
  out.height = best.F;
  if (std::isfinite(best.F)) {
    out.witness = search.witness(best);
    const auto& e = out.witness.hop_excess;
    out.height = std::max({e[0], e[1], e[2]});
  }
  return out;
}

bool verify_witness(const HConvexFn& f, const HPoint& xi0, double s, const HPoint& xi_prime, const Witness& w,
                    double tol) {
  if (w.xi1.dim() != xi0.dim() || w.xi2.dim() != xi0.dim() || xi_prime.dim() != xi0.dim()) return false;
  const HPoint* pts[4] = {&xi0, &w.xi1, &w.xi2, &xi_prime};
  for (int k = 0; k < 3; ++k) {
    const HPoint& a = *pts[k];
    const HPoint& b = *pts[k + 1];
    if (std::abs(plane_residual(a, b)) > tol * plane_scale(a, b)) return false;
    const double e = excess(f, a, f.horizontal_gradient(a), b, tol);
    if (!(e < s)) return false;
  }
  return true;
}

ReversedWitness reverse_witness(const HConvexFn& f, const HPoint& xi0, double s, const HPoint& xi_prime,
                                const Witness& w, double Kp) {
  if (!(Kp >= 1.0)) throw DomainError("reverse_witness: K' must be at least 1");
  ReversedWitness out;
  out.witness.xi1 = w.xi2;
  out.witness.xi2 = w.xi1;
  const HPoint* pts[4] = {&xi_prime, &w.xi2, &w.xi1, &xi0};
  for (int k = 0; k < 3; ++k) {
    const HPoint& a = *pts[k];
    const HPoint& b = *pts[k + 1];
    const double e = excess(f, a, f.horizontal_gradient(a), b);
    out.witness.hop_excess[static_cast<size_t>(k)] = e;
    if (!(e < Kp * s) && out.failing_hop < 0) {
      out.failing_hop = k;
      out.defect = e - Kp * s;
    }
  }
  out.ok = out.failing_hop < 0;
  return out;
}

SampledHnPoint sample_hn_point(const HConvexFn& f, const HPoint& center, double s, std::mt19937_64& rng) {
  const int n = center.dim();
  SampledHnPoint out;
  HPoint cur = center;
  HPoint hops[3];
  for (int k = 0; k < 3; ++k) {
    const HSectionSpec spec = HSectionSpec::at(f, cur, s);
    const HorizontalVector u = random_unit(rng, n);
    const double R = h_section_radius(f, spec, u);
    if (std::isinf(R)) throw NumericalFailure("sample_hn_point: unbounded H-section at " + to_string(cur));
    const HorizontalVector v = u * (uniform(rng, 0.0, 1.0) * R);
    out.witness.hop_excess[static_cast<size_t>(k)] = excess_v(f, spec, v);
    cur = exp_horizontal(cur, v);
    hops[k] = cur;
  }
  out.witness.xi1 = hops[0];
  out.witness.xi2 = hops[1];
  out.point = hops[2];
  return out;
}

HnEngulfingReport check_E_HnK(const HConvexFn& f, double K, const HnEngulfingSampling& hs,
                              const ExactMembership& exact) {
  if (!(K > 1.0)) throw DomainError("check_E_HnK: K must exceed 1");
  const int n = f.dim();
  struct Part {
    std::vector<HnProbe> bad, unsure;
    std::size_t checks = 0, certified = 0;
  };
  std::vector<Part> parts(hs.n_sections);
  parallel_for(hs.n_sections, [&](std::size_t i) {
    auto rng = stream(hs.seed, i);
    const HPoint xi = random_in_gauge_ball(rng, n, hs.box);
    const double s = log_uniform(rng, hs.s_min, hs.s_max);
    for (std::size_t j = 0; j < hs.n_inner; ++j) {
      const HPoint xp = sample_hn_point(f, xi, s, rng).point;
      for (std::size_t k = 0; k < hs.n_probes; ++k) {
        const HPoint zeta = k == 0 ? xi : sample_hn_point(f, xi, s, rng).point;
        Part& part = parts[i];
        ++part.checks;
        if (exact) {
          if (exact(xp, K * s, zeta)) ++part.certified;
          else part.bad.push_back({xi, s, xp, zeta, 0.0});
          continue;
        }
        const HnMembership m = hn_contains(f, xp, K * s, zeta, hs.budget);
        if (m.in()) ++part.certified;
        else part.unsure.push_back({xi, s, xp, zeta, m.best_height});
      }
    }
  });
  HnEngulfingReport rep;
  rep.K = K;
  for (Part& p : parts) {
    rep.checks += p.checks;
    rep.certified += p.certified;
    for (auto& v : p.bad) rep.violations.push_back(std::move(v));
    for (auto& v : p.unsure) rep.inconclusive.push_back(std::move(v));
  }
  return rep;
}

TripleUnionReport triple_union_inclusion(const HConvexFn& f, const HPoint& xi, double r, std::size_t samples,
                                         std::uint64_t seed) {
  if (!(r > 0.0)) throw DomainError("triple_union_inclusion: r must be positive");
  const int n = xi.dim();
  struct Part {
    std::vector<TripleUnionDefect> a, b;
  };
  std::vector<Part> parts(samples);
  parallel_for(samples, [&](std::size_t i) {
    auto rng = stream(seed, i);
    // (a) hops inside S^H(., m(., r))
    HPoint cur = xi;
    for (int k = 0; k < 3; ++k) {
      const double m = m_M(f, cur, r).m;
      const HSectionSpec spec = HSectionSpec::at(f, cur, m);
      const HorizontalVector u = random_unit(rng, n);
      const double R = h_section_radius(f, spec, u);
      cur = exp_horizontal(cur, u * (uniform(rng, 0.0, 1.0) * R));
    }
    if (!tilde_ball_contains(xi, r, cur))
      parts[i].a.push_back({cur, tilde_norm_closed_form(group_mul(group_inv(xi), cur)) - r});
    // (b) three hops of norm <= r, checked against S^H(., M(., r))
    cur = xi;
    double worst = -kInf;
    for (int k = 0; k < 3; ++k) {
      const HorizontalVector v = random_unit(rng, n) * (uniform(rng, 0.0, 1.0) * r);
      const double M = m_M(f, cur, r).M;
      const double e = excess_v(f, HSectionSpec::at(f, cur, 1.0), v);
      worst = std::max(worst, e - M - 1e-9 * (1.0 + M));
      cur = exp_horizontal(cur, v);
    }
    if (worst > 0.0) parts[i].b.push_back({cur, worst});
  });
  TripleUnionReport rep;
  rep.checked_a = rep.checked_b = samples;
  for (auto& p : parts) {
    for (auto& d : p.a) rep.defects_a.push_back(std::move(d));
    for (auto& d : p.b) rep.defects_b.push_back(std::move(d));
  }
  return rep;
}

std::vector<ProfileRow> hn_boundary_profile(const HConvexFn& f, const HPoint& xi0, double s,
                                            const std::vector<double>& rho_grid, const HnBudget& budget, double sign,
                                            double t_tol) {
  if (xi0.dim() != 1) throw DimensionError("hn_boundary_profile: n = 1 only");
  std::vector<ProfileRow> rows(rho_grid.size());
  parallel_for(rho_grid.size(), [&](std::size_t i) {
    const double rho = rho_grid[i];
    auto inside = [&](double t) { return hn_contains(f, xi0, s, group_mul(xi0, HPoint{rho, 0.0, sign * t}), budget).in(); };
    rows[i].rho = rho;
    if (!inside(0.0)) return;
    double lo = 0.0, hi = s;
    for (int k = 0; k < 60 && inside(hi); ++k) lo = hi, hi *= 2.0;
    while (hi - lo > t_tol * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (inside(mid)) lo = mid;
      else hi = mid;
    }
    rows[i].t_sup = 0.5 * (lo + hi);
  });
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ProfileRow>& rows) {
  os << "rho,t_sup\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.rho, r.t_sup);
    os << buf;
  }
}

}  // namespace heis
