#include "heis/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace heis {

HorizontalVector::HorizontalVector(const VecN& a, const VecN& b) {
  if (a.size() != b.size()) throw DimensionError("HorizontalVector: a and b differ in length");
  v.resize(2 * a.size());
  v.head(a.size()) = a;
  v.tail(b.size()) = b;
}

HorizontalVector::HorizontalVector(std::initializer_list<double> coords) {
  if (coords.size() % 2 != 0 || coords.size() == 0 || coords.size() > 2 * kMaxDim)
    throw DimensionError("HorizontalVector: need 2n coordinates");
  v.resize(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) v[i++] = c;
}

HPoint::HPoint(const VecN& x_, const VecN& y_, double t_) : x(x_), y(y_), t(t_) {
  if (x.size() != y.size() || x.size() == 0) throw DimensionError("HPoint: x and y must share a length n >= 1");
}

HPoint::HPoint(std::span<const double> c) {
  if (c.size() % 2 == 0 || c.size() < 3 || c.size() > 2 * kMaxDim + 1)
    throw DimensionError("HPoint: need 2n+1 coordinates with 1 <= n <= " + std::to_string(kMaxDim));
  const auto n = static_cast<Eigen::Index>((c.size() - 1) / 2);
  x.resize(n);
  y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = c[static_cast<size_t>(i)];
    y[i] = c[static_cast<size_t>(n + i)];
  }
  t = c.back();
}

HPoint::HPoint(std::initializer_list<double> coords)
    : HPoint(std::span<const double>(coords.begin(), coords.size())) {}

HPoint HPoint::identity(int n) { return HPoint(VecN::Zero(n), VecN::Zero(n), 0.0); }

std::vector<double> HPoint::coords() const {
  std::vector<double> c;
  c.reserve(static_cast<size_t>(2 * dim() + 1));
  for (int i = 0; i < dim(); ++i) c.push_back(x[i]);
  for (int i = 0; i < dim(); ++i) c.push_back(y[i]);
  c.push_back(t);
  return c;
}

bool HPoint::is_finite() const { return x.allFinite() && y.allFinite() && std::isfinite(t); }

void require_same_dim(const HPoint& p, const HPoint& q, const char* op) {
  if (p.dim() != q.dim())
    throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(p.dim()) + " vs " +
                         std::to_string(q.dim()) + ")");
}

HorizontalVector project(const HPoint& p) { return HorizontalVector(p.x, p.y); }

HPoint group_mul(const HPoint& p, const HPoint& q) {
  require_same_dim(p, q, "group_mul");
  return HPoint(p.x + q.x, p.y + q.y, p.t + q.t + 2.0 * (q.x.dot(p.y) - p.x.dot(q.y)));
}

HPoint group_inv(const HPoint& p) { return HPoint(-p.x, -p.y, -p.t); }

HPoint dilate(double lambda, const HPoint& p) {
  if (!(lambda > 0.0)) throw DomainError("dilate: lambda must be positive");
  return HPoint(lambda * p.x, lambda * p.y, lambda * lambda * p.t);
}

double gauge_norm(const HPoint& p) {
  const double h = p.x.squaredNorm() + p.y.squaredNorm();
  return std::sqrt(std::sqrt(h * h + p.t * p.t));
}

double gauge_dist(const HPoint& p, const HPoint& q) {
  require_same_dim(p, q, "gauge_dist");
  // N(q^{-1} o p) without materializing the product.
  const VecN dx = p.x - q.x;
  const VecN dy = p.y - q.y;
  const double dt = p.t - q.t + 2.0 * (-p.x.dot(q.y) + q.x.dot(p.y));
  const double h = dx.squaredNorm() + dy.squaredNorm();
  return std::sqrt(std::sqrt(h * h + dt * dt));
}

HPoint exp_horizontal(const HPoint& p, const HorizontalVector& v) {
  if (v.dim() != p.dim()) throw DimensionError("exp_horizontal: dimension mismatch");
  const auto a = v.a();
  const auto b = v.b();
  return HPoint(p.x + a, p.y + b, p.t + 2.0 * (a.dot(p.y) - p.x.dot(b)));
}

double plane_residual(const HPoint& p0, const HPoint& p) {
  require_same_dim(p0, p, "plane_residual");
  return p.t - p0.t - 2.0 * (p0.y.dot(p.x) - p0.x.dot(p.y));
}

bool on_horizontal_plane(const HPoint& p0, const HPoint& p, double tol) {
  if (tol < 0.0) throw DomainError("on_horizontal_plane: tol must be >= 0");
  return std::abs(plane_residual(p0, p)) <= tol;
}

const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::proper: return "proper";
    case TraceKind::identical: return "identical";
    case TraceKind::empty: return "empty";
  }
  return "?";
}

HorizontalVector PlaneTrace::closest_point() const {
  const double nn = normal.v.squaredNorm();
  if (nn == 0.0) return HorizontalVector(base.dim());
  return normal * (offset / nn);
}

PlaneTrace plane_trace(const HPoint& p0, const HPoint& p1, double tol) {
  require_same_dim(p0, p1, "plane_trace");
  // p1 in H_{p0 o exp v}  <=>  2 a.(y1 - y0) + 2 b.(x0 - x1) = t0 - t1 + 2 (y0.x1 - x0.y1)
  PlaneTrace tr;
  tr.base = p0;
  tr.normal = HorizontalVector(VecN(2.0 * (p1.y - p0.y)), VecN(2.0 * (p0.x - p1.x)));
  tr.offset = p0.t - p1.t + 2.0 * (p0.y.dot(p1.x) - p0.x.dot(p1.y));
  if (tr.normal.v.squaredNorm() == 0.0)
    tr.kind = std::abs(tr.offset) <= tol ? TraceKind::identical : TraceKind::empty;
  return tr;
}

HPoint recompose(const HorizontalVector& v1, const HorizontalVector& v2, const HorizontalVector& v3) {
  HPoint p = HPoint::identity(v1.dim());
  p = exp_horizontal(p, v1);
  p = exp_horizontal(p, v2);
  return exp_horizontal(p, v3);
}

HPoint recompose(const Decomposition3& d) { return recompose(d.v1, d.v2, d.v3); }

double tilde_t_max(double radius, double rho) {
  if (radius < 0.0 || rho < 0.0) throw DomainError("tilde_t_max: negative argument");
  if (rho > 3.0 * radius) return -1.0;
  // (r + rho)^{3/2} (3r - rho)^{1/2}, written as in the boundary profile.
  const double inner = 3.0 * radius * radius + 2.0 * rho * radius - rho * rho;
  return std::sqrt(std::max(inner, 0.0)) * (radius + rho);
}

double tilde_norm_closed_form(const HPoint& p) {
  const double rho = std::sqrt(p.x.squaredNorm() + p.y.squaredNorm());
  const double t = std::abs(p.t);
  if (t == 0.0) return rho / 3.0;
  double lo = rho / 3.0;
  double hi = std::max(rho, std::sqrt(t));
  if (tilde_t_max(lo, rho) >= t) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tilde_t_max(mid, rho) >= t) hi = mid;
    else lo = mid;
  }
  return hi;
}

bool tilde_ball_contains(const HPoint& center, double r, const HPoint& p, TildeMethod method, double tol) {
  if (!(r > 0.0)) throw DomainError("tilde_ball_contains: r must be positive");
  require_same_dim(center, p, "tilde_ball_contains");
  const HPoint rel = group_mul(group_inv(center), p);
  if (method == TildeMethod::automatic)
    method = rel.dim() == 1 ? TildeMethod::closed_form : TildeMethod::search;
  if (method == TildeMethod::closed_form) {
    const double rho = std::sqrt(rel.x.squaredNorm() + rel.y.squaredNorm());
    if (rho > 3.0 * r + tol) return false;
    return std::abs(rel.t) <= tilde_t_max(r, std::min(rho, 3.0 * r)) + tol;
  }
  return decompose3(rel, DecomposeStrategy::minmax).max_norm <= r + tol;
}

std::string to_string(const HPoint& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  const auto c = p.coords();
  for (size_t i = 0; i < c.size(); ++i) os << (i ? ", " : "") << c[i];
  os << ')';
  return os.str();
}

std::string to_string(const HorizontalVector& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < v.v.size(); ++i) os << (i ? ", " : "") << v.v[i];
  os << ']';
  return os.str();
}

}  // namespace heis
