#pragma once

// Heisenberg group arithmetic in exponential coordinates.
//
// A point of H^n is (x, y, t) with x, y in R^n and t in R. The group law is
//
//   (x, y, t) o (x', y', t') = (x + x', y + y', t + t' + 2 (x'.y - x.y'))
//
// and the horizontal layer V1 is identified with R^{2n} through v = (a, b).

#include <Eigen/Core>

#include <array>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heis {

inline constexpr int kMaxDim = 8;

// Fixed-capacity dynamic vectors: no heap traffic in the inner search loops.
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Vec2N = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arguments of incompatible dimension.
struct DimensionError : Error {
  using Error::Error;
};

// Argument outside an operation's domain (lambda <= 0, r <= 0, v = 0, ...).
struct DomainError : Error {
  using Error::Error;
};

// A numerical procedure could not produce a meaningful answer
// (non-convex input detected, bracket cap exceeded, non-finite values).
struct NumericalFailure : Error {
  using Error::Error;
};

struct HorizontalVector {
  Vec2N v;  // (a_1..a_n, b_1..b_n)

  HorizontalVector() = default;
  explicit HorizontalVector(int n) : v(Vec2N::Zero(2 * n)) {}
  explicit HorizontalVector(const Vec2N& coords) : v(coords) {}
  HorizontalVector(const VecN& a, const VecN& b);
  HorizontalVector(std::initializer_list<double> coords);

  int dim() const { return static_cast<int>(v.size()) / 2; }
  auto a() const { return v.head(dim()); }
  auto b() const { return v.tail(dim()); }
  double norm() const { return v.norm(); }
  double dot(const HorizontalVector& o) const { return v.dot(o.v); }

  HorizontalVector operator+(const HorizontalVector& o) const { return HorizontalVector(Vec2N(v + o.v)); }
  HorizontalVector operator-(const HorizontalVector& o) const { return HorizontalVector(Vec2N(v - o.v)); }
  HorizontalVector operator*(double s) const { return HorizontalVector(Vec2N(v * s)); }
  HorizontalVector operator-() const { return HorizontalVector(Vec2N(-v)); }
};

struct HPoint {
  VecN x;
  VecN y;
  double t = 0.0;

  HPoint() = default;
  HPoint(const VecN& x_, const VecN& y_, double t_);
  // Flat coordinates (x_1..x_n, y_1..y_n, t); size must be odd.
  explicit HPoint(std::span<const double> coords);
  HPoint(std::initializer_list<double> coords);

  static HPoint identity(int n);

  int dim() const { return static_cast<int>(x.size()); }
  std::vector<double> coords() const;
  bool is_finite() const;
};

// Pr_1: projection onto the horizontal coordinates.
HorizontalVector project(const HPoint& p);

HPoint group_mul(const HPoint& p, const HPoint& q);
HPoint group_inv(const HPoint& p);
HPoint dilate(double lambda, const HPoint& p);

double gauge_norm(const HPoint& p);
// d_g(p, q) = N(q^{-1} o p).
double gauge_dist(const HPoint& p, const HPoint& q);

// p o exp(v) = p o (a, b, 0).
HPoint exp_horizontal(const HPoint& p, const HorizontalVector& v);

// True iff |t - t0 - 2 (y0.x - x0.y)| <= tol.
bool on_horizontal_plane(const HPoint& p0, const HPoint& p, double tol = 1e-9);
// Signed residual of the plane equation of H_{p0} evaluated at p.
double plane_residual(const HPoint& p0, const HPoint& p);

enum class TraceKind { proper, identical, empty };

const char* to_string(TraceKind k);

// {v in R^{2n} : normal . v = offset}, the set of v with p1 in H_{p0 o exp v}.
// For n = 1 and kind = proper this is a line; for n > 1 it is a hyperplane
// of dimension 2n - 1 (hyperplanar() reports this).
struct PlaneTrace {
  HPoint base;
  HorizontalVector normal;
  double offset = 0.0;
  TraceKind kind = TraceKind::proper;

  bool hyperplanar() const { return kind == TraceKind::proper && base.dim() > 1; }
  // Minimum-norm solution; only meaningful for kind = proper.
  HorizontalVector closest_point() const;
  double residual(const HorizontalVector& v) const { return normal.dot(v) - offset; }
};

PlaneTrace plane_trace(const HPoint& p0, const HPoint& p1, double tol = 1e-12);

enum class DecomposeStrategy { coordinate, minmax };

struct Decomposition3 {
  HorizontalVector v1, v2, v3;
  double max_norm = 0.0;
};

HPoint recompose(const Decomposition3& d);
HPoint recompose(const HorizontalVector& v1, const HorizontalVector& v2, const HorizontalVector& v3);

// exp(v1) o exp(v2) o exp(v3) = target.
Decomposition3 decompose3(const HPoint& target, DecomposeStrategy strategy = DecomposeStrategy::minmax);

// Largest |t| of the closed tilde-ball of radius `radius` at horizontal
// distance rho from the t-axis (zero-padded beyond 3 * radius: returns -1).
double tilde_t_max(double radius, double rho);
// Smallest radius r with p in the closed tilde-ball B~(e, r), from the
// closed form. Radial in (x, y), so valid for every n.
double tilde_norm_closed_form(const HPoint& p);

enum class TildeMethod { automatic, closed_form, search };

// Closed ball: center^{-1} o p admits a 3-decomposition with max norm <= r.
// automatic: closed form for n = 1, minmax decomposition search otherwise.
bool tilde_ball_contains(const HPoint& center, double r, const HPoint& p,
                         TildeMethod method = TildeMethod::automatic, double tol = 1e-9);

void require_same_dim(const HPoint& p, const HPoint& q, const char* op);

std::string to_string(const HPoint& p);
std::string to_string(const HorizontalVector& v);

}  // namespace heis
