#include "heis/validate.hpp"

#include "heis/numeric.hpp"
#include "heis/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace heis {

double closed_form_t_max(double r, double rho) {
  if (!(r > 0.0)) throw DomainError("closed_form_t_max: r must be positive");
  const double a = std::sqrt(r);
  if (!(rho >= 0.0) || rho > 3.0 * a * (1.0 + 1e-12))
    throw DomainError("closed_form_t_max: rho must lie in [0, 3 sqrt(r)]");
  const double rad = std::max(0.0, 3.0 * r + 2.0 * rho * a - rho * rho);
  return std::sqrt(rad) * (a + rho);
}

ProfilePoint eta(double r, double theta) {
  if (!(r > 0.0)) throw DomainError("eta: r must be positive");
  constexpr double lo = -2.0 * std::numbers::pi / 3.0;
  if (!(theta >= lo - 1e-12 && theta <= 1e-12)) throw DomainError("eta: theta must lie in [-2pi/3, 0]");
  const double a = std::sqrt(r), c = std::cos(theta), sn = std::sin(theta);
  ProfilePoint pp;
  pp.theta = theta;
  pp.point = HPoint{a * (1.0 + c + std::cos(2.0 * theta)), a * (sn + std::sin(2.0 * theta)), -4.0 * r * sn * (1.0 + c)};
  pp.d = a * (1.0 + 2.0 * c);
  pp.t = 4.0 * r * std::sqrt(std::max(0.0, 1.0 - c * c)) * (1.0 + c);
  return pp;
}

bool sqnorm_hn_contains_exact(const HPoint& center, double s, const HPoint& p) {
  require_same_dim(center, p, "sqnorm_hn_contains_exact");
  if (!(s > 0.0)) throw DomainError("sqnorm_hn_contains_exact: s must be positive");
  const double r = tilde_norm_closed_form(group_mul(group_inv(center), p));
  return r * r < s;
}

ExactMembership sqnorm_membership() { return &sqnorm_hn_contains_exact; }

double distance_to_boundary(double s, double rho, double t) {
  if (!(s > 0.0)) throw DomainError("distance_to_boundary: s must be positive");
  const double end = 3.0 * std::sqrt(s);
  t = std::abs(t);
  // quadratic crowding towards rho = 3 sqrt(s), where the curve turns vertical
  auto at = [&](double u) {
    const double w = 1.0 - u;
    return end * (1.0 - w * w);
  };
  auto d2 = [&](double u) {
    const double rp = at(u);
    const double dt = t - closed_form_t_max(s, std::min(rp, end));
    return (rho - rp) * (rho - rp) + dt * dt;
  };
  constexpr int N = 4000;
  int best = 0;
  double bv = d2(0.0);
  for (int i = 1; i <= N; ++i) {
    const double v = d2(double(i) / N);
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  const double a = double(std::max(0, best - 1)) / N, b = double(std::min(N, best + 1)) / N;
  const auto g = numeric::golden_min(d2, a, b, 100);
  return std::sqrt(std::min(bv, g.fx));
}

std::vector<std::pair<double, double>> example_grid(const GridSpec& g) {
  if (g.n_rho < 2 || g.n_t < 2 || !(g.s > 0.0)) throw DomainError("example_grid: bad grid spec");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(std::size_t(g.n_rho) * std::size_t(g.n_t));
  const double rmax = g.rho_factor * std::sqrt(g.s), tmax = g.t_factor * g.s;
  for (int i = 0; i < g.n_rho; ++i)
    for (int j = 0; j < g.n_t; ++j) pts.emplace_back(rmax * i / (g.n_rho - 1), tmax * j / (g.n_t - 1));
  return pts;
}

AgreementReport example_agreement(const std::vector<std::pair<double, double>>& points, double s, double band,
                                  const HnBudget& budget) {
  if (!(s > 0.0)) throw DomainError("example_agreement: s must be positive");
  const HConvexFn f = HConvexFn::sqnorm(1);
  const HPoint e = HPoint::identity(1);
  const double end = 3.0 * std::sqrt(s);

  enum : int { kExcluded, kAgree, kDisagree };
  struct Row {
    int state = kExcluded;
    bool closed = false, search = false;
  };
  std::vector<Row> rows(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    const auto [rho, t] = points[k];
    if (distance_to_boundary(s, rho, t) < band) return;
    Row& r = rows[k];
    r.closed = rho < end && std::abs(t) < closed_form_t_max(s, rho);
    r.search = hn_contains(f, e, s, HPoint{rho, 0.0, t}, budget).in();
    r.state = r.closed == r.search ? kAgree : kDisagree;
  });

  AgreementReport rep;
  rep.total = points.size();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    if (r.state == kExcluded) {
      ++rep.excluded;
      continue;
    }
    ++rep.compared;
    rep.closed_in += r.closed ? 1 : 0;
    if (r.state == kAgree) ++rep.agree;
    else rep.disagreements.push_back({points[k].first, points[k].second, r.closed, r.search});
  }
  rep.rate = rep.compared ? double(rep.agree) / double(rep.compared) : 1.0;
  return rep;
}

AgreementReport example_agreement(const GridSpec& g, const HnBudget& budget) {
  return example_agreement(example_grid(g), g.s, g.band, budget);
}

void write_plot_script(std::ostream& os, const std::string& csv_path, double s) {
  os << "# gnuplot\n"
     << "set datafile separator ','\n"
     << "set key top right\n"
     << "set xlabel 'rho'\n"
     << "set ylabel 't'\n"
     << "r = " << s << "\n"
     << "tmax(x) = (x >= 0 && x <= 3*sqrt(r)) ? sqrt(abs(3*r + 2*x*sqrt(r) - x*x))*(sqrt(r) + x) : 1/0\n"
     << "set samples 1000\n"
     << "set xrange [0:3.2*sqrt(r)]\n"
     << "plot '" << csv_path << "' using 1:2 skip 1 with points pt 7 ps 0.5 title 'search', \\\n"
     << "     '" << csv_path << "' using 1:(-$2) skip 1 with points pt 7 ps 0.5 notitle, \\\n"
     << "     tmax(x) with lines lw 2 title 'closed form', \\\n"
     << "     -tmax(x) with lines lw 2 notitle\n";
}

const char* to_string(StageStatus s) {
  switch (s) {
    case StageStatus::pass: return "pass";
    case StageStatus::fail: return "fail";
    case StageStatus::skipped: return "skipped";
    case StageStatus::error: return "error";
  }
  return "?";
}

bool ChainReport::all_pass() const {
  return std::all_of(stages.begin(), stages.end(), [](const ChainStage& s) { return s.status == StageStatus::pass; });
}

const ChainStage* ChainReport::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

using Clock = std::chrono::steady_clock;

// Runs one stage body; hard errors come back out tagged with the stage name.
template <class Body>
ChainStage run_stage(const std::string& name, Body&& body) {
  ChainStage st;
  st.name = name;
  const auto t0 = Clock::now();
  try {
    body(st);
  } catch (const DomainError& e) {
    throw DomainError("chain stage '" + name + "': " + e.what());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("chain stage '" + name + "': " + e.what());
  } catch (const Error& e) {
    throw Error("chain stage '" + name + "': " + e.what());
  }
  st.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return st;
}

ChainStage skipped(const std::string& name, const std::string& why) {
  ChainStage st;
  st.name = name;
  st.status = StageStatus::skipped;
  st.note = "premise failed: " + why;
  return st;
}

}  // namespace

ChainReport chain_suite(const HConvexFn& f, const ChainConfig& cfg) {
  ChainReport rep;
  rep.function = f.name();
  const int n = f.dim();

  std::vector<HPoint> centers{HPoint::identity(n)};
  for (std::size_t i = 0; i < cfg.random_centers; ++i) {
    auto rng = stream(cfg.seed ^ 0xC0FFEEull, i);
    centers.push_back(random_in_gauge_ball(rng, n, cfg.center_box));
  }

  rep.stages.push_back(run_stage("convexity", [&](ChainStage& st) {
    const auto c = check_h_convexity(f, cfg.convexity_points, cfg.convexity_dirs, cfg.seed);
    st.violations = c.violations.size();
    st.constants.push_back({"max_defect", c.max_defect, "est"});
    st.constants.push_back({"samples", double(c.samples), "exact"});
    st.status = c.violations.empty() ? StageStatus::pass : StageStatus::fail;
  }));
  if (rep.stages.back().status != StageStatus::pass) {
    for (const char* s : {"round", "slope", "engulfing", "hn_engulfing", "d_phi", "quasi_triangle"})
      rep.stages.push_back(skipped(s, "convexity"));
    return rep;
  }

  rep.stages.push_back(run_stage("round", [&](ChainStage& st) {
    double K0 = std::numeric_limits<double>::infinity(), worst_spread = 1.0;
    try {
      for (const HPoint& c : centers) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double s : cfg.s_grid) {
          const double ratio = round_constants(f, c, s).ratio;
          lo = std::min(lo, ratio);
          hi = std::max(hi, ratio);
        }
        K0 = std::min(K0, lo);
        worst_spread = std::max(worst_spread, lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
      }
    } catch (const NumericalFailure& e) {
      // an unbounded section is a failed roundness premise, not a crash
      st.status = StageStatus::fail;
      st.note = e.what();
      return;
    }
    st.constants.push_back({"K0_est", K0, "est"});
    st.constants.push_back({"ratio_spread", worst_spread, "est"});
    const bool ok = worst_spread < cfg.round_decay && K0 >= cfg.round_floor;
    st.status = ok ? StageStatus::pass : StageStatus::fail;
    if (!ok) st.note = "R_in/R_out not bounded below uniformly in s";
  }));

  rep.stages.push_back(run_stage("slope", [&](ChainStage& st) {
    double K1 = 0.0, worst_growth = 1.0;
    try {
      for (const HPoint& c : centers) {
        const SlopeConstant sc = slope_constant(f, std::vector<HPoint>{c}, cfg.r_grid);
        const auto [lo, hi] = std::minmax_element(sc.max_ratio.begin(), sc.max_ratio.end());
        K1 = std::max(K1, sc.K1_est);
        worst_growth = std::max(worst_growth, *hi / *lo);
      }
    } catch (const NumericalFailure& e) {
      st.status = StageStatus::fail;
      st.note = e.what();
      return;
    }
    st.constants.push_back({"K1_est", K1, "est"});
    st.constants.push_back({"ratio_growth", worst_growth, "est"});
    const bool ok = worst_growth < cfg.slope_growth && K1 < cfg.slope_cap;
    if (ok) {
      const DoublingReport d = doubling_report(f, centers, cfg.r_grid);
      st.constants.push_back({"B1_est", d.B1_est, "est"});
      st.constants.push_back({"B2_est", d.B2_est, "est"});
      st.constants.push_back({"B4_est", d.B4_est, "est"});
      st.constants.push_back({"gamma_est", double(d.gamma_est), "est"});
    }
    st.status = ok ? StageStatus::pass : StageStatus::fail;
    if (!ok) st.note = "M/m grows along r";
  }));

  rep.stages.push_back(run_stage("engulfing", [&](ChainStage& st) {
    PairSampling ps;
    ps.box = cfg.engulfing.box;
    const KppEstimate kp = estimate_Kpp(f, cfg.kpp_pairs, cfg.seed, ps);
    const double K = 2.0 * kp.Kpp * (kp.Kpp + 1.0) * (1.0 + 1e-6);
    const EngulfingReport dia = check_diamond(f, kp.Kpp * (1.0 + 1e-6), cfg.engulfing);
    const EngulfingReport ehk = check_EHK(f, K, cfg.engulfing);
    st.constants.push_back({"Kpp_est", kp.Kpp, "est"});
    st.constants.push_back({"R_min", kp.R_min, "est"});
    st.constants.push_back({"R_max", kp.R_max, "est"});
    st.constants.push_back({"K", K, "est"});
    st.constants.push_back({"checks", double(dia.checks + ehk.checks), "exact"});
    st.violations = dia.violations.size() + ehk.violations.size();
    st.status = st.violations == 0 ? StageStatus::pass : StageStatus::fail;
  }));

  std::string missing;
  for (const char* s : {"round", "slope", "engulfing"})
    if (rep.stage(s)->status != StageStatus::pass) missing += missing.empty() ? s : std::string(", ") + s;
  if (!missing.empty()) {
    for (const char* s : {"hn_engulfing", "d_phi", "quasi_triangle"}) rep.stages.push_back(skipped(s, missing));
    return rep;
  }

  const bool exact = cfg.exact_oracle && f.kind() == Builtin::sqnorm;

  rep.stages.push_back(run_stage("hn_engulfing", [&](ChainStage& st) {
    HnEngulfingSampling hs = cfg.hn;
    hs.seed = cfg.seed;
    const HnEngulfingReport r = check_E_HnK(f, cfg.K_hn, hs, exact ? sqnorm_membership() : ExactMembership{});
    st.constants.push_back({"K", cfg.K_hn, "exact"});
    st.constants.push_back({"checks", double(r.checks), "exact"});
    st.constants.push_back({"certified", double(r.certified), "exact"});
    st.constants.push_back({"inconclusive", double(r.inconclusive.size()), "exact"});
    st.violations = r.violations.size();
    st.status = st.violations == 0 ? StageStatus::pass : StageStatus::fail;
    if (exact) st.note = "membership from the closed form";
  }));

  rep.stages.push_back(run_stage("d_phi", [&](ChainStage& st) {
    std::size_t bad = 0;
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < cfg.dphi_pairs; ++i) {
      auto rng = stream(cfg.seed ^ 0xD15Eull, i);
      const HPoint a = random_in_gauge_ball(rng, n, cfg.center_box);
      const HPoint b = random_in_gauge_ball(rng, n, cfg.center_box);
      const QuasiDistance ab = d_phi(f, a, b, cfg.quasi), ba = d_phi(f, b, a, cfg.quasi);
      const QuasiDistance aa = d_phi(f, a, a, cfg.quasi);
      if (ab.value != ba.value || aa.value != 0.0 || !(ab.value > 0.0) || !std::isfinite(ab.value)) ++bad;
      if (exact) {
        const double r = tilde_norm_closed_form(group_mul(group_inv(a), b));
        const double ref = r * r;
        const double rel = std::abs(ab.value - ref) / ref;
        worst_rel = std::max(worst_rel, rel);
        if (rel > 2.0 * cfg.quasi.rel_tol) ++bad;
      }
    }
    st.constants.push_back({"pairs", double(cfg.dphi_pairs), "exact"});
    if (exact) st.constants.push_back({"max_rel_err", worst_rel, "est"});
    st.violations = bad;
    st.status = bad == 0 ? StageStatus::pass : StageStatus::fail;
  }));

  rep.stages.push_back(run_stage("quasi_triangle", [&](ChainStage& st) {
    const TriangleEstimate te = quasi_triangle_constant(f, cfg.triples, cfg.seed, cfg.center_box, cfg.quasi);
    st.constants.push_back({"H_est", te.H_est, "est"});
    st.constants.push_back({"triples", double(te.triples), "exact"});
    const bool ok = te.triples > 0 && std::isfinite(te.H_est) && te.H_est > 0.0;
    st.status = ok ? StageStatus::pass : StageStatus::fail;
  }));

  return rep;
}

}  // namespace heis
