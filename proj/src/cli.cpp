#include "heis/cli.hpp"

#include "heis/core.hpp"
#include "heis/engulfing.hpp"
#include "heis/funcs.hpp"
#include "heis/hnsections.hpp"
#include "heis/quasimetric.hpp"
#include "heis/sampling.hpp"
#include "heis/sections.hpp"
#include "heis/validate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace heis::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json val(double v, const char* provenance) { return json{{"value", v}, {"provenance", provenance}}; }

json coords(const HPoint& p) { return p.coords(); }

json coords(const HorizontalVector& v) {
  std::vector<double> c(v.v.data(), v.v.data() + v.v.size());
  return c;
}

json witness_json(const Witness& w) {
  return json{{"xi1", coords(w.xi1)},
              {"xi2", coords(w.xi2)},
              {"hop_excess", {w.hop_excess[0], w.hop_excess[1], w.hop_excess[2]}}};
}

struct Stage {
  explicit Stage(std::string n) : name(std::move(n)) {}

  std::string name;
  std::string status = "pass";
  json constants = json::object();
  json violations = json::array();
  json data;  // optional bulk output
  std::string note;
  double seconds = 0.0;

  void fail(const std::string& why = {}) {
    status = "fail";
    if (!why.empty()) note = why;
  }
};

// Config access; every value actually used is echoed into `resolved`.
struct Context {
  json config = json::object();
  json resolved = json::object();
  std::uint64_t seed = 1;
  std::string budget_name = "default";
  HnBudget budget;
  bool timing = false;
  std::string csv_path, plot_path;

  const json* find(const char* group, const char* key) const {
    if (group && config.contains(group) && config[group].is_object() && config[group].contains(key))
      return &config[group][key];
    if (config.contains(key)) return &config[key];
    return nullptr;
  }

  void echo(const char* group, const char* key, const json& v) {
    if (group) resolved[group][key] = v;
    else resolved[key] = v;
  }

  static std::string where(const char* group, const char* key) {
    return group ? std::string(group) + "." + key : std::string(key);
  }

  double num(const char* group, const char* key, double def) {
    const json* j = find(group, key);
    double v = def;
    if (j) {
      if (!j->is_number()) throw UsageError("config: '" + where(group, key) + "' must be a number");
      v = j->get<double>();
    }
    echo(group, key, v);
    return v;
  }

  std::size_t count(const char* group, const char* key, std::size_t def) {
    const json* j = find(group, key);
    std::size_t v = def;
    if (j) {
      if (!j->is_number_integer() || j->get<long long>() < 0)
        throw UsageError("config: '" + where(group, key) + "' must be a non-negative integer");
      v = j->get<std::size_t>();
    }
    echo(group, key, v);
    return v;
  }

  std::string str(const char* group, const char* key, const std::string& def) {
    const json* j = find(group, key);
    std::string v = def;
    if (j) {
      if (!j->is_string()) throw UsageError("config: '" + where(group, key) + "' must be a string");
      v = j->get<std::string>();
    }
    echo(group, key, v);
    return v;
  }

  std::vector<double> list(const char* group, const char* key, const std::vector<double>& def) {
    const json* j = find(group, key);
    std::vector<double> v = def;
    if (j) {
      if (!j->is_array()) throw UsageError("config: '" + where(group, key) + "' must be an array of numbers");
      v.clear();
      for (const auto& e : *j) {
        if (!e.is_number()) throw UsageError("config: '" + where(group, key) + "' must be an array of numbers");
        v.push_back(e.get<double>());
      }
    }
    echo(group, key, v);
    return v;
  }

  static HPoint to_point(const json& j, int n, const std::string& what) {
    if (!j.is_array() || j.size() != std::size_t(2 * n + 1))
      throw UsageError("config: '" + what + "' must be an array of " + std::to_string(2 * n + 1) + " numbers");
    std::vector<double> c;
    for (const auto& e : j) {
      if (!e.is_number()) throw UsageError("config: '" + what + "' must contain numbers");
      c.push_back(e.get<double>());
    }
    return HPoint(std::span<const double>(c));
  }

  HPoint point(const char* key, int n) {
    const json* j = find(nullptr, key);
    HPoint p = j ? to_point(*j, n, key) : HPoint::identity(n);
    echo(nullptr, key, p.coords());
    return p;
  }

  std::vector<HPoint> points(const char* key, int n, const std::vector<HPoint>& def) {
    const json* j = find(nullptr, key);
    std::vector<HPoint> v = def;
    if (j) {
      if (!j->is_array()) throw UsageError(std::string("config: '") + key + "' must be an array of points");
      v.clear();
      for (const auto& e : *j) v.push_back(to_point(e, n, key));
    }
    json echoed = json::array();
    for (const auto& p : v) echoed.push_back(p.coords());
    echo(nullptr, key, echoed);
    return v;
  }

  HConvexFn function() {
    if (!config.contains("function")) {
      resolved["function"] = {{"builtin", "sqnorm"}, {"n", 1}};
      return HConvexFn::sqnorm(1);
    }
    json fn = config["function"];
    if (fn.is_string()) fn = json{{"builtin", fn}};
    if (!fn.is_object()) throw UsageError("config: 'function' must be an object or a builtin name");
    int n = 1;
    if (fn.contains("n")) {
      if (!fn["n"].is_number_integer()) throw UsageError("config: 'function.n' must be an integer");
      n = fn["n"].get<int>();
    }
    if (n < 1 || n > kMaxDim) throw UsageError("config: 'function.n' must lie in [1, " + std::to_string(kMaxDim) + "]");
    resolved["function"] = fn;
    if (fn.contains("expr")) {
      if (!fn["expr"].is_string()) throw UsageError("config: 'function.expr' must be a string");
      resolved["function"]["n"] = n;
      return HConvexFn::from_expr(fn["expr"].get<std::string>(), n);
    }
    if (!fn.contains("builtin") || !fn["builtin"].is_string())
      throw UsageError("config: 'function' needs 'builtin' or 'expr'");
    const std::string b = fn["builtin"].get<std::string>();
    if (b == "sqnorm" || b == "sqnorm_t") {
      resolved["function"]["n"] = n;
      return b == "sqnorm" ? HConvexFn::sqnorm(n) : HConvexFn::sqnorm_t(n);
    }
    if (b == "wang") return HConvexFn::wang();
    if (b == "quad") {
      if (!fn.contains("A") || !fn["A"].is_array()) throw UsageError("config: quad needs a matrix 'A'");
      const auto& rows = fn["A"];
      const std::size_t m = rows.size();
      Eigen::MatrixXd A(m, m);
      for (std::size_t i = 0; i < m; ++i) {
        if (!rows[i].is_array() || rows[i].size() != m) throw UsageError("config: 'A' must be square");
        for (std::size_t j = 0; j < m; ++j) {
          if (!rows[i][j].is_number()) throw UsageError("config: 'A' must contain numbers");
          A(Eigen::Index(i), Eigen::Index(j)) = rows[i][j].get<double>();
        }
      }
      return HConvexFn::quad(A);
    }
    throw UsageError("config: unknown builtin '" + b + "'");
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw UsageError("cannot open '" + path + "' for writing");
  return os;
}

// ---------------------------------------------------------------- commands

std::vector<Stage> cmd_convexity(Context& cx) {
  const HConvexFn f = cx.function();
  ConvexityOptions opts;
  opts.box_radius = cx.num("grid", "box", opts.box_radius);
  opts.step_scale = cx.num("grid", "step", opts.step_scale);
  opts.tol = cx.num("tol", "convexity", opts.tol);
  const std::size_t points = cx.count("budgets", "points", 100);
  const std::size_t dirs = cx.count("budgets", "dirs", 20);
  const ConvexityReport r = check_h_convexity(f, points, dirs, cx.seed, opts);

  Stage st{"convexity"};
  st.constants["samples"] = val(double(r.samples), "exact");
  st.constants["max_defect"] = val(r.max_defect, "est");
  for (const auto& v : r.violations)
    st.violations.push_back({{"xi", coords(v.xi)}, {"v", coords(v.v)}, {"lambda", v.lambda}, {"defect", v.defect}});
  if (!r.violations.empty()) st.fail("convexity violated along sampled horizontal segments");

  if (!cx.csv_path.empty()) {
    auto os = open_out(cx.csv_path);
    const int n = f.dim();
    for (int i = 1; i <= 2 * n + 1; ++i) os << "xi_" << i << ",";
    for (int i = 1; i <= 2 * n; ++i) os << "v_" << i << ",";
    os << "lambda,defect\n";
    for (const auto& v : r.violations) {
      for (double c : v.xi.coords()) os << g17(c) << ",";
      for (Eigen::Index i = 0; i < v.v.v.size(); ++i) os << g17(v.v.v[i]) << ",";
      os << g17(v.lambda) << "," << g17(v.defect) << "\n";
    }
  }
  return {st};
}

std::vector<Stage> cmd_section_h(Context& cx) {
  const HConvexFn f = cx.function();
  const HPoint c = cx.point("center", f.dim());
  const double s = cx.num(nullptr, "height", 1.0);
  const int dirs = int(cx.count("grid", "dirs", f.dim() == 1 ? 720 : 2000));
  RadiusOptions ro;
  ro.rel_tol = cx.num("tol", "radius", ro.rel_tol);
  ro.cap = cx.num("tol", "cap", ro.cap);
  const RadialBoundary b = h_section_boundary(f, HSectionSpec::at(f, c, s), dirs, ro);

  Stage st{"section-h"};
  st.constants["directions"] = val(double(b.radii.size()), "exact");
  st.constants["min_radius"] = val(b.min_radius(), "bracket");
  st.constants["max_radius"] = val(b.max_radius(), "bracket");
  if (!b.bounded()) {
    st.status = "numerical_failure";
    st.note = "some ray exceeds the radius cap";
  }
  if (!cx.csv_path.empty()) {
    auto os = open_out(cx.csv_path);
    write_csv(os, b);
  }
  return {st};
}

std::vector<double> default_rho_grid(double s) {
  std::vector<double> g;
  for (int i = 0; i <= 30; ++i) g.push_back(3.0 * std::sqrt(s) * i / 30.0);
  return g;
}

std::vector<Stage> cmd_section_hn(Context& cx) {
  const HConvexFn f = cx.function();
  const int n = f.dim();
  const HPoint c = cx.point("center", n);
  const double s = cx.num(nullptr, "height", 1.0);
  const bool exact = f.kind() == Builtin::sqnorm;
  std::vector<Stage> out;

  if (cx.config.contains("points")) {
    const auto pts = cx.points("points", n, {});
    Stage st{"membership"};
    std::vector<HnMembership> ms(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { ms[i] = hn_contains(f, c, s, pts[i], cx.budget); });
    std::size_t in = 0, mismatch = 0;
    st.data = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      json row{{"point", coords(pts[i])}, {"verdict", to_string(ms[i].verdict)}, {"best_height", val(ms[i].best_height, "est")}};
      if (ms[i].in()) {
        ++in;
        row["witness"] = witness_json(ms[i].witness);
      }
      if (exact) {
        const bool ref = sqnorm_hn_contains_exact(c, s, pts[i]);
        row["closed_form_in"] = ref;
        if (ref != ms[i].in()) {
          ++mismatch;
          st.violations.push_back(row);
        }
      }
      st.data.push_back(row);
    }
    st.constants["in"] = val(double(in), "exact");
    st.constants["out_at_resolution"] = val(double(pts.size() - in), "exact");
    if (mismatch) st.fail("search disagrees with the closed form");
    out.push_back(st);
  }

  if (!cx.config.contains("points") || cx.find("grid", "rho")) {
    if (n != 1) throw UsageError("section-hn profiles need n = 1");
    const auto rho = cx.list("grid", "rho", default_rho_grid(s));
    const double t_tol = cx.num("tol", "profile", 1e-5);
    const auto rows = hn_boundary_profile(f, c, s, rho, cx.budget, 1.0, t_tol);
    Stage st{"profile"};
    st.data = json::array();
    for (const auto& r : rows) {
      json row{{"rho", r.rho}, {"t_sup", val(r.t_sup, "bracket")}};
      if (exact && r.rho <= 3.0 * std::sqrt(s)) row["closed_form"] = val(closed_form_t_max(s, r.rho), "exact");
      st.data.push_back(row);
    }
    if (!cx.csv_path.empty()) {
      auto os = open_out(cx.csv_path);
      write_csv(os, rows);
    }
    if (!cx.plot_path.empty()) {
      auto os = open_out(cx.plot_path);
      write_plot_script(os, cx.csv_path.empty() ? "profile.csv" : cx.csv_path, s);
    }
    out.push_back(st);
  }
  return out;
}

std::vector<Stage> cmd_m_M(Context& cx) {
  const HConvexFn f = cx.function();
  const HPoint c = cx.point("center", f.dim());
  const auto r_grid = cx.list("grid", "r", {0.25, 0.5, 1.0, 2.0, 4.0});
  if (r_grid.empty()) throw UsageError("config: 'grid.r' must not be empty");
  SlopeOptions so;
  so.n_dirs = int(cx.count("grid", "dirs", 0));

  Stage st{"m-M"};
  st.data = json::array();
  std::vector<SlopeProfile> prof(r_grid.size());
  parallel_for(r_grid.size(), [&](std::size_t i) { prof[i] = m_M(f, c, r_grid[i], so); });
  double K1 = 0.0;
  for (const auto& p : prof) {
    const double ratio = p.m > 0.0 ? p.M / p.m : std::numeric_limits<double>::infinity();
    K1 = std::max(K1, ratio);
    st.data.push_back({{"r", p.r}, {"m", val(p.m, "est")}, {"M", val(p.M, "est")}, {"ratio", val(ratio, "est")}});
  }
  st.constants["K1_est"] = val(K1, "est");
  const MonotoneReport mono = verify_m_monotone(f, c, r_grid, 1e-12, so);
  for (const auto& d : mono.defects) st.violations.push_back({{"r0", d.r0}, {"r1", d.r1}, {"m0", d.m0}, {"m1", d.m1}});
  if (!mono.monotone) st.fail("m(xi, r) not increasing in r");
  if (std::all_of(prof.begin(), prof.end(), [](const SlopeProfile& p) { return p.m > 0.0; })) {
    const DoublingReport d = doubling_report(f, std::vector<HPoint>{c}, r_grid, 16, so);
    st.constants["B1_est"] = val(d.B1_est, "est");
    st.constants["B2_est"] = val(d.B2_est, "est");
    st.constants["B4_est"] = val(d.B4_est, "est");
    st.constants["gamma_est"] = val(double(d.gamma_est), "est");
  }
  if (!cx.csv_path.empty()) {
    auto os = open_out(cx.csv_path);
    os << "r,m,M\n";
    for (const auto& p : prof) os << g17(p.r) << "," << g17(p.m) << "," << g17(p.M) << "\n";
  }
  return {st};
}

json violation_json(const EngulfingViolation& v) {
  return {{"xi", coords(v.xi)}, {"s", v.s}, {"xi_prime", coords(v.xi_prime)}, {"witness", coords(v.witness)}, {"defect", v.defect}};
}

std::vector<Stage> cmd_engulfing(Context& cx) {
  const HConvexFn f = cx.function();
  PairSampling ps;
  ps.box = cx.num("grid", "box", ps.box);
  ps.min_step = cx.num("grid", "min_step", ps.min_step);
  const std::size_t pairs = cx.count("budgets", "pairs", 2000);
  EngulfingSampling es;
  es.box = ps.box;
  es.n_sections = cx.count("budgets", "sections", es.n_sections);
  es.n_inner = cx.count("budgets", "inner", es.n_inner);
  es.n_probes = cx.count("budgets", "probes", es.n_probes);
  es.s_min = cx.num("grid", "s_min", es.s_min);
  es.s_max = cx.num("grid", "s_max", es.s_max);
  es.seed = cx.seed;

  const KppEstimate kp = estimate_Kpp(f, pairs, cx.seed, ps);
  Stage s1{"Kpp"};
  s1.constants["Kpp_est"] = val(kp.Kpp, "est");
  s1.constants["R_min"] = val(kp.R_min, "est");
  s1.constants["R_max"] = val(kp.R_max, "est");
  s1.constants["pairs"] = val(double(kp.pairs), "exact");
  s1.constants["skipped"] = val(double(kp.skipped), "exact");
  const double mono = check_h_monotone(f, pairs, cx.seed, ps);
  s1.constants["min_monotone_product"] = val(mono, "est");
  if (mono < -1e-9) s1.fail("horizontal gradient not monotone");

  const double Kd = kp.Kpp * (1.0 + 1e-6);
  const double Kdefault = 2.0 * kp.Kpp * (kp.Kpp + 1.0) * (1.0 + 1e-6);
  const json* kj = cx.find(nullptr, "K");
  const double K = cx.num(nullptr, "K", Kdefault);

  const EngulfingReport dia = check_diamond(f, Kd, es);
  Stage s2{"diamond"};
  s2.constants["K"] = val(Kd, "est");
  s2.constants["checks"] = val(double(dia.checks), "exact");
  for (const auto& v : dia.violations) s2.violations.push_back(violation_json(v));
  if (!dia.violations.empty()) s2.fail();

  const EngulfingReport ehk = check_EHK(f, K, es);
  Stage s3{"EHK"};
  s3.constants["K"] = val(K, kj ? "exact" : "est");
  s3.constants["K_derived"] = val(Kdefault, "est");
  s3.constants["checks"] = val(double(ehk.checks), "exact");
  for (const auto& v : ehk.violations) s3.violations.push_back(violation_json(v));
  if (!ehk.violations.empty()) s3.fail();

  if (!cx.csv_path.empty()) {
    auto os = open_out(cx.csv_path);
    std::vector<EngulfingViolation> all = ehk.violations;
    all.insert(all.end(), dia.violations.begin(), dia.violations.end());
    write_csv(os, all);
  }
  return {s1, s2, s3};
}

QuasiOptions quasi_options(Context& cx) {
  QuasiOptions q;
  q.rel_tol = cx.num("tol", "d_phi", q.rel_tol);
  q.cap = cx.num("tol", "cap", q.cap);
  q.budget = cx.budget;
  return q;
}

std::vector<Stage> cmd_quasimetric(Context& cx) {
  const HConvexFn f = cx.function();
  const int n = f.dim();
  HPoint a = HPoint::identity(n), b = a, c = a;
  b.x[0] = 1.0;
  c.t = 1.0;
  const auto pts = cx.points("points", n, {a, b, c});
  const QuasiOptions q = quasi_options(cx);
  const auto d = distance_matrix(f, pts, q);

  Stage st{"distances"};
  st.data = json::array();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      st.data.push_back({{"row", i}, {"col", j}, {"value", val(d[i][j].value, "bracket")},
                         {"s_lo", d[i][j].s_lo}, {"s_hi", d[i][j].s_hi}});
  std::vector<Stage> out{st};

  const std::size_t triples = cx.count("budgets", "triples", 0);
  if (triples > 0) {
    const TriangleEstimate te = quasi_triangle_constant(f, triples, cx.seed, cx.num("grid", "box", 5.0), q);
    Stage tri{"quasi_triangle"};
    tri.constants["H_est"] = val(te.H_est, "est");
    tri.constants["triples"] = val(double(te.triples), "exact");
    out.push_back(tri);
  }
  if (!cx.csv_path.empty()) {
    auto os = open_out(cx.csv_path);
    write_distance_csv(os, pts, d);
  }
  return out;
}

std::vector<Stage> cmd_decompose(Context& cx) {
  const json* fj = cx.find(nullptr, "function");
  int n = 1;
  if (fj) n = cx.function().dim();
  const HPoint target = cx.point("target", n);
  const std::string strat = cx.str(nullptr, "strategy", "minmax");
  DecomposeStrategy ds;
  if (strat == "minmax") ds = DecomposeStrategy::minmax;
  else if (strat == "coordinate") ds = DecomposeStrategy::coordinate;
  else throw UsageError("config: 'strategy' must be 'minmax' or 'coordinate'");

  const Decomposition3 d = decompose3(target, ds);
  const HPoint back = recompose(d);
  double residual = std::abs(back.t - target.t);
  for (int i = 0; i < target.dim(); ++i)
    residual = std::max({residual, std::abs(back.x[i] - target.x[i]), std::abs(back.y[i] - target.y[i])});
  Stage st{"decompose"};
  st.data = {{"v1", coords(d.v1)}, {"v2", coords(d.v2)}, {"v3", coords(d.v3)}};
  st.constants["max_norm"] = val(d.max_norm, "est");
  st.constants["residual"] = val(residual, "exact");
  st.constants["tilde_norm"] = val(tilde_norm_closed_form(target), "exact");
  const double N = gauge_norm(target);
  if (residual > 1e-12 * (1.0 + N * N)) st.fail("recomposition does not reproduce the target");
  return {st};
}

std::vector<Stage> cmd_example_verify(Context& cx) {
  GridSpec g;
  g.s = cx.num("grid", "s", g.s);
  g.n_rho = int(cx.count("grid", "n_rho", std::size_t(g.n_rho)));
  g.n_t = int(cx.count("grid", "n_t", std::size_t(g.n_t)));
  g.rho_factor = cx.num("grid", "rho_factor", g.rho_factor);
  g.t_factor = cx.num("grid", "t_factor", g.t_factor);
  g.band = cx.num("grid", "band", g.band);
  const double need = cx.num("tol", "agreement", 0.99);
  const double t_tol = cx.num("tol", "checkpoint", 1e-3);

  const AgreementReport rep = example_agreement(g, cx.budget);
  Stage st{"grid_agreement"};
  st.constants["rate"] = val(rep.rate, "est");
  st.constants["total"] = val(double(rep.total), "exact");
  st.constants["compared"] = val(double(rep.compared), "exact");
  st.constants["excluded"] = val(double(rep.excluded), "exact");
  st.constants["agree"] = val(double(rep.agree), "exact");
  for (const auto& d : rep.disagreements)
    st.violations.push_back({{"rho", d.rho}, {"t", d.t}, {"closed_form_in", d.closed_form_in}, {"search_in", d.search_in}});
  if (rep.rate < need) st.fail("agreement below threshold");

  const HConvexFn f = HConvexFn::sqnorm(1);
  const double a = std::sqrt(g.s);
  const auto rows = hn_boundary_profile(f, HPoint::identity(1), g.s, {0.0, 2.0 * a, 3.0 * a}, cx.budget);
  Stage cp{"profile_checkpoints"};
  const char* names[] = {"t_sup_0", "t_sup_2", "t_sup_3"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ref = closed_form_t_max(g.s, rows[i].rho);
    cp.constants[names[i]] = val(rows[i].t_sup, "bracket");
    cp.constants[std::string(names[i]) + "_closed_form"] = val(ref, "exact");
    if (std::abs(rows[i].t_sup - ref) > t_tol * std::max(1.0, g.s))
      cp.violations.push_back({{"rho", rows[i].rho}, {"t_sup", rows[i].t_sup}, {"closed_form", ref}});
  }
  if (!cp.violations.empty()) cp.fail("profile off the closed form");

  if (!cx.csv_path.empty()) {
    auto os = open_out(cx.csv_path);
    write_csv(os, hn_boundary_profile(f, HPoint::identity(1), g.s, default_rho_grid(g.s), cx.budget));
  }
  if (!cx.plot_path.empty()) {
    auto os = open_out(cx.plot_path);
    write_plot_script(os, cx.csv_path.empty() ? "profile.csv" : cx.csv_path, g.s);
  }
  return {st, cp};
}

std::vector<Stage> cmd_chain(Context& cx) {
  const HConvexFn f = cx.function();
  ChainConfig cfg;
  cfg.seed = cx.seed;
  cfg.kpp_pairs = cx.count("budgets", "pairs", cfg.kpp_pairs);
  cfg.engulfing.n_sections = cx.count("budgets", "sections", cfg.engulfing.n_sections);
  cfg.engulfing.seed = cx.seed;
  cfg.triples = cx.count("budgets", "triples", cfg.triples);
  cfg.dphi_pairs = cx.count("budgets", "dphi_pairs", cfg.dphi_pairs);
  cfg.K_hn = cx.num(nullptr, "K_hn", cfg.K_hn);
  cfg.hn.budget = cx.budget;
  cfg.quasi = quasi_options(cx);
  const ChainReport rep = chain_suite(f, cfg);

  std::vector<Stage> out;
  for (const auto& cs : rep.stages) {
    Stage st{cs.name};
    st.status = to_string(cs.status);
    for (const auto& c : cs.constants) st.constants[c.name] = val(c.value, c.provenance.c_str());
    st.constants["violations"] = val(double(cs.violations), "exact");
    st.note = cs.note;
    st.seconds = cs.seconds;
    out.push_back(st);
  }
  return out;
}

json stage_json(const Stage& s, bool timing) {
  json j{{"name", s.name}, {"status", s.status}, {"constants", s.constants}, {"violations", s.violations}};
  if (!s.data.is_null()) j["data"] = s.data;
  if (!s.note.empty()) j["note"] = s.note;
  if (timing) j["seconds"] = s.seconds;
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sections, engulfing and quasi-distances of H-convex functions on the Heisenberg group"};
  app.set_version_flag("--version", kVersion);
  std::string config_path, out_path, csv_path, plot_path, budget_name;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  bool timing = false;
  app.add_option("--config", config_path, "JSON run config");
  app.add_option("--out", out_path, "write the JSON report here instead of stdout");
  app.add_option("--csv", csv_path, "bulk geometry CSV");
  app.add_option("--plot", plot_path, "gnuplot script for the profile CSV");
  app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--budget", budget_name, "search budget preset")->check(CLI::IsMember({"quick", "default", "thorough"}));
  app.add_option("--jobs", jobs, "worker threads (HEIS_JOBS overrides)");
  app.add_flag("--timing", timing, "include wall-clock seconds in the report");
  app.fallthrough();
  app.require_subcommand(1, 1);

  using Cmd = std::vector<Stage> (*)(Context&);
  const std::vector<std::pair<std::string, Cmd>> commands = {
      {"convexity", cmd_convexity},     {"section-h", cmd_section_h},   {"section-hn", cmd_section_hn},
      {"m-M", cmd_m_M},                 {"engulfing", cmd_engulfing},   {"quasimetric", cmd_quasimetric},
      {"decompose", cmd_decompose},     {"example-verify", cmd_example_verify}, {"chain", cmd_chain}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  if (jobs > 0) set_default_workers(jobs);

  Context cx;
  cx.timing = timing;
  cx.csv_path = csv_path;
  cx.plot_path = plot_path;
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw UsageError("cannot read config '" + config_path + "'");
      try {
        cx.config = json::parse(is);
      } catch (const json::parse_error& e) {
        throw UsageError("malformed JSON in '" + config_path + "' at byte " + std::to_string(e.byte) + ": " + e.what());
      }
      if (!cx.config.is_object()) throw UsageError("config must be a JSON object");
    }
    cx.seed = seed ? *seed : std::uint64_t(cx.count(nullptr, "seed", 1));
    cx.resolved["seed"] = cx.seed;
    cx.budget_name = !budget_name.empty() ? budget_name : cx.str(nullptr, "budget", "default");
    cx.budget = HnBudget::preset(cx.budget_name);
    cx.resolved["budget"] = cx.budget_name;

    Cmd fn = nullptr;
    for (const auto& [name, f] : commands)
      if (name == cmd) fn = f;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Stage> stages = fn(cx);
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    int code = kOk;
    for (const auto& s : stages) {
      if (s.status == "fail") code = std::max(code, int(kViolations));
      if (s.status == "numerical_failure") code = kNumerical;
    }
    json report{{"version", kVersion}, {"command", cmd}, {"config", cx.resolved}, {"seed", cx.seed},
                {"budget", cx.budget_name}, {"exit_code", code}};
    json st = json::array();
    for (const auto& s : stages) st.push_back(stage_json(s, timing));
    report["stages"] = st;
    if (timing) report["seconds"] = total;

    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) out << text;
    else {
      auto os = open_out(out_path);
      os << text;
    }
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SyntaxError& e) {
    err << "error: expression: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace heis::cli
