#include "heis/engulfing.hpp"

#include "heis/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace heis {

double ratio_iii(const HConvexFn& f, const HPoint& xi, const HPoint& xi_prime) {
  const HorizontalVector d = project(xi_prime) - project(xi);
  if (d.norm() == 0.0) throw DomainError("ratio_iii: points must differ");
  const HorizontalVector p = f.horizontal_gradient(xi);
  const double den = excess(f, xi, p, xi_prime);
  if (!(den > 0.0)) throw NumericalFailure("ratio_iii: zero denominator (affine direction) at " + to_string(xi));
  const HorizontalVector q = f.horizontal_gradient(xi_prime);
  return (q - p).dot(d) / den;
}

std::pair<HPoint, HPoint> sample_horizontal_pair(std::mt19937_64& rng, int n, const PairSampling& ps) {
  HPoint xi = random_in_gauge_ball(rng, n, ps.box);
  const HorizontalVector v = random_unit(rng, n) * log_uniform(rng, ps.min_step, ps.box);
  HPoint xp = exp_horizontal(xi, v);
  return {std::move(xi), std::move(xp)};
}

KppEstimate estimate_Kpp(const HConvexFn& f, std::size_t n_pairs, std::uint64_t seed, const PairSampling& ps,
                         double tol) {
  if (n_pairs == 0) throw DomainError("estimate_Kpp: n_pairs must be positive");
  const int n = f.dim();
  struct Sample {
    double R = std::numeric_limits<double>::quiet_NaN();
    double negative = 0.0;
    HPoint xi;
  };
  std::vector<Sample> out(n_pairs);
  parallel_for(n_pairs, [&](std::size_t i) {
    auto rng = stream(seed, i);
    const auto [xi, xp] = sample_horizontal_pair(rng, n, ps);
    const HorizontalVector d = project(xp) - project(xi);
    const HorizontalVector p = f.horizontal_gradient(xi);
    const double fx = f(xi);
    const double fxp = f(xp);
    const double den = fxp - fx - p.dot(d);
    if (den < -tol * (1.0 + std::abs(fx) + std::abs(fxp))) {
      out[i].negative = den;
      out[i].xi = xi;
      return;
    }
    if (den < 1e-12) return;
    out[i].R = (f.horizontal_gradient(xp) - p).dot(d) / den;
  });
  KppEstimate est;
  est.R_min = std::numeric_limits<double>::infinity();
  est.R_max = -std::numeric_limits<double>::infinity();
  for (const Sample& s : out) {
    if (s.negative < 0.0)
      throw NumericalFailure("estimate_Kpp: negative excess " + std::to_string(s.negative) + " at " + to_string(s.xi) +
                             " (input not H-convex)");
    if (std::isnan(s.R)) {
      ++est.skipped;
      continue;
    }
    ++est.pairs;
    est.R_min = std::min(est.R_min, s.R);
    est.R_max = std::max(est.R_max, s.R);
  }
  if (est.pairs == 0) throw NumericalFailure("estimate_Kpp: every sampled pair had negligible excess");
  if (est.R_min <= 1.0 + tol)
    throw NumericalFailure("estimate_Kpp: inf R = " + std::to_string(est.R_min) +
                           " <= 1; characterization fails at resolution (not engulfing?)");
  est.Kpp = std::max(est.R_max - 1.0, 1.0 / (est.R_min - 1.0));
  return est;
}

namespace {

struct InnerSample {
  HPoint xi;
  double s;
  HSectionSpec spec;
  HPoint xi_prime;
  HorizontalVector u;  // direction of xi' from xi
};

// (xi, s) and the xi' in S^H(xi, s) drawn for section i; independent of
// what the caller does with them, so E(H,K) and diamond see the same sample.
std::vector<InnerSample> draw_section(const HConvexFn& f, const EngulfingSampling& es, std::size_t i) {
  auto rng = stream(es.seed, i);
  const int n = f.dim();
  const HPoint xi = random_in_gauge_ball(rng, n, es.box);
  const double s = log_uniform(rng, es.s_min, es.s_max);
  const HSectionSpec spec = HSectionSpec::at(f, xi, s);
  std::vector<InnerSample> out;
  for (std::size_t j = 0; j < es.n_inner; ++j) {
    const HorizontalVector u = random_unit(rng, n);
    const double R = h_section_radius(f, spec, u);
    if (std::isinf(R)) throw NumericalFailure("engulfing sample: unbounded H-section at " + to_string(xi));
    const double frac = uniform(rng, 0.0, 1.0);
    out.push_back({xi, s, spec, exp_horizontal(xi, u * (frac * R)), u});
  }
  return out;
}

bool violates(double e, double K, double s) { return e >= K * s + 1e-9 * s; }

}  // namespace

EngulfingReport check_EHK(const HConvexFn& f, double K, const EngulfingSampling& es) {
  if (!(K > 1.0)) throw DomainError("check_EHK: K must exceed 1");
  const int n = f.dim();
  std::vector<std::vector<EngulfingViolation>> found(es.n_sections);
  std::vector<std::size_t> counts(es.n_sections, 0);
  parallel_for(es.n_sections, [&](std::size_t i) {
    const auto inner = draw_section(f, es, i);
    for (std::size_t j = 0; j < inner.size(); ++j) {
      const InnerSample& smp = inner[j];
      auto rng = stream(es.seed ^ 0x5DEECE66DULL, i * es.n_inner + j);
      const HorizontalVector q = f.horizontal_gradient(smp.xi_prime);
      // The trace of H_xi' in H_xi passes through 0 and through v'. For
      // n = 1 it is the line spanned by u; for n > 1 the hyperplane
      // normal . w = 0, which contains u.
      const PlaneTrace tr = plane_trace(smp.xi, smp.xi_prime);
      const double r_plus = h_section_radius(f, smp.spec, smp.u);
      const double r_minus = h_section_radius(f, smp.spec, -smp.u);
      for (std::size_t k = 0; k < es.n_probes; ++k) {
        HorizontalVector w = smp.u;
        double tau;
        if (k == 0) tau = 0.0;
        else if (k == 1) tau = -r_minus * (1.0 - 1e-9);
        else if (k == 2) tau = r_plus * (1.0 - 1e-9);
        else if (n == 1 || k % 2 == 1 || tr.kind != TraceKind::proper) tau = uniform(rng, -r_minus, r_plus);
        else {
          const HorizontalVector g = random_unit(rng, n);
          const HorizontalVector nrm = tr.normal * (1.0 / tr.normal.norm());
          w = g - nrm * nrm.dot(g);
          if (w.norm() < 1e-12) continue;
          w = w * (1.0 / w.norm());
          const double rp = h_section_radius(f, smp.spec, w);
          const double rm = h_section_radius(f, smp.spec, -w);
          tau = uniform(rng, -rm, rp);
        }
        const HPoint zeta = exp_horizontal(smp.xi, w * tau);
        const double e = excess(f, smp.xi_prime, q, zeta);
        ++counts[i];
        if (violates(e, K, smp.s)) found[i].push_back({smp.xi, smp.s, smp.xi_prime, zeta, e - K * smp.s});
      }
    }
  });
  EngulfingReport rep;
  rep.K = K;
  rep.sections = es.n_sections;
  for (std::size_t i = 0; i < es.n_sections; ++i) {
    rep.checks += counts[i];
    for (auto& v : found[i]) rep.violations.push_back(std::move(v));
  }
  return rep;
}

EngulfingReport check_diamond(const HConvexFn& f, double K, const EngulfingSampling& es) {
  if (!(K > 1.0)) throw DomainError("check_diamond: K must exceed 1");
  std::vector<std::vector<EngulfingViolation>> found(es.n_sections);
  parallel_for(es.n_sections, [&](std::size_t i) {
    for (const InnerSample& smp : draw_section(f, es, i)) {
      const double e = excess(f, smp.xi_prime, f.horizontal_gradient(smp.xi_prime), smp.xi);
      if (violates(e, K, smp.s)) found[i].push_back({smp.xi, smp.s, smp.xi_prime, smp.xi, e - K * smp.s});
    }
  });
  EngulfingReport rep;
  rep.K = K;
  rep.sections = es.n_sections;
  rep.checks = es.n_sections * es.n_inner;
  for (auto& list : found)
    for (auto& v : list) rep.violations.push_back(std::move(v));
  return rep;
}

double check_h_monotone(const HConvexFn& f, std::size_t n_pairs, std::uint64_t seed, const PairSampling& ps) {
  if (n_pairs == 0) throw DomainError("check_h_monotone: n_pairs must be positive");
  std::vector<double> vals(n_pairs);
  parallel_for(n_pairs, [&](std::size_t i) {
    auto rng = stream(seed, i);
    const auto [xi, xp] = sample_horizontal_pair(rng, f.dim(), ps);
    const HorizontalVector d = project(xp) - project(xi);
    vals[i] = (f.horizontal_gradient(xp) - f.horizontal_gradient(xi)).dot(d);
  });
  return *std::min_element(vals.begin(), vals.end());
}

void write_csv(std::ostream& os, const std::vector<EngulfingViolation>& v) {
  if (v.empty()) {
    os << "xi,s,xi_prime,witness,defect\n";
    return;
  }
  const int n = v.front().xi.dim();
  auto header = [&](const char* pre) {
    for (int i = 1; i <= n; ++i) os << pre << "x" << i << ",";
    for (int i = 1; i <= n; ++i) os << pre << "y" << i << ",";
    os << pre << "t,";
  };
  header("xi_");
  os << "s,";
  header("xip_");
  header("w_");
  os << "defect\n";
  char buf[32];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
  };
  for (const auto& e : v) {
    for (double c : e.xi.coords()) num(c), os << ",";
    num(e.s), os << ",";
    for (double c : e.xi_prime.coords()) num(c), os << ",";
    for (double c : e.witness.coords()) num(c), os << ",";
    num(e.defect), os << "\n";
  }
}

}  // namespace heis
