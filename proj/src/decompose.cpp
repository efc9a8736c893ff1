// Three-hop horizontal decompositions of a group element.

#include "heis/core.hpp"
#include "heis/numeric.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace heis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Decomposition3 make(HorizontalVector v1, HorizontalVector v2, HorizontalVector v3) {
  Decomposition3 d{std::move(v1), std::move(v2), std::move(v3), 0.0};
  d.max_norm = std::max({d.v1.norm(), d.v2.norm(), d.v3.norm()});
  return d;
}

// Hop c = (re, im) placed on the complex line through the unit vector u = (ux + i uy).
HorizontalVector on_complex_line(const VecN& ux, const VecN& uy, double re, double im) {
  return HorizontalVector(VecN(re * ux - im * uy), VecN(re * uy + im * ux));
}

// Equilateral triangle with enclosed area |t| / 4 on the first complex axis.
Decomposition3 equilateral(int n, double t) {
  const double side = std::sqrt(std::abs(t) / std::sqrt(3.0));
  const double theta = (t >= 0.0 ? -2.0 : 2.0) * std::numbers::pi / 3.0;
  VecN ux = VecN::Zero(n), uy = VecN::Zero(n);
  ux[0] = 1.0;
  return make(on_complex_line(ux, uy, side, 0.0),
              on_complex_line(ux, uy, side * std::cos(theta), side * std::sin(theta)),
              on_complex_line(ux, uy, side * std::cos(2 * theta), side * std::sin(2 * theta)));
}

// v1 = a e_1 (x-part), v2 = b e_1 (y-part), v3 = remainder; t = 2 b x1 - 2 a y1 - 2 a b.
struct CoordinateFamily {
  const HPoint& target;

  double b_of(double a) const {
    const double den = 2.0 * (target.x[0] - a);
    if (den == 0.0) return kInf;
    return (target.t + 2.0 * a * target.y[0]) / den;
  }

  Decomposition3 member(double a, double b) const {
    const int n = target.dim();
    VecN e = VecN::Zero(n);
    e[0] = 1.0;
    VecN zero = VecN::Zero(n);
    return make(HorizontalVector(VecN(a * e), zero), HorizontalVector(zero, VecN(b * e)),
                HorizontalVector(VecN(target.x - a * e), VecN(target.y - b * e)));
  }

  double cost(double a) const {
    const double b = b_of(a);
    if (!std::isfinite(b)) return kInf;
    const double r3 = std::sqrt((target.x[0] - a) * (target.x[0] - a) + (target.y[0] - b) * (target.y[0] - b) +
                                target.x.tail(target.dim() - 1).squaredNorm() +
                                target.y.tail(target.dim() - 1).squaredNorm());
    return std::max({std::abs(a), std::abs(b), r3});
  }
};

Decomposition3 coordinate_canonical(const HPoint& target) {
  const CoordinateFamily fam{target};
  const double x1 = target.x[0], y1 = target.y[0], t = target.t;
  if (x1 != 0.0 && std::abs(x1) >= std::abs(y1)) return fam.member(0.0, t / (2.0 * x1));
  if (y1 != 0.0) return fam.member(-t / (2.0 * y1), 0.0);
  if (t == 0.0) return fam.member(0.0, 0.0);
  const double a = std::sqrt(std::abs(t) / 2.0);
  return fam.member(a, -t / (2.0 * a));
}

// Mirror-symmetric family on the complex line of the horizontal part:
// c1 = (h, k), c2 = (rho - 2h, 0), c3 = (h, -k), with t = 4 k (rho - h).
struct SymmetricFamily {
  double rho, t;

  double k_of(double h) const {
    const double den = 4.0 * (rho - h);
    if (den == 0.0) return t == 0.0 ? 0.0 : kInf;
    return t / den;
  }

  double cost(double h) const {
    const double k = k_of(h);
    if (!std::isfinite(k)) return kInf;
    return std::max(std::hypot(h, k), std::abs(rho - 2.0 * h));
  }
};

}  // namespace

Decomposition3 decompose3(const HPoint& target, DecomposeStrategy strategy) {
  const int n = target.dim();
  const double rho = std::sqrt(target.x.squaredNorm() + target.y.squaredNorm());
  if (rho == 0.0) {
    if (target.t == 0.0) return make(HorizontalVector(n), HorizontalVector(n), HorizontalVector(n));
    return equilateral(n, target.t);
  }
  if (target.t == 0.0 && strategy == DecomposeStrategy::coordinate)
    return make(project(target), HorizontalVector(n), HorizontalVector(n));

  Decomposition3 best = coordinate_canonical(target);
  if (strategy == DecomposeStrategy::coordinate) return best;

  // Free parameter of the coordinate family.
  {
    const CoordinateFamily fam{target};
    const double span = 2.0 * best.max_norm + std::abs(target.x[0]);
    auto f = [&](double a) { return fam.cost(a); };
    const auto m = numeric::scan_then_golden(f, -span, span, 257);
    if (m.fx < best.max_norm) best = fam.member(m.x, fam.b_of(m.x));
  }

  // Free parameter of the mirror-symmetric family on the complex line of (x, y).
  {
    const SymmetricFamily fam{rho, target.t};
    const double ub = std::min(best.max_norm, 2.0 * gauge_norm(target) + rho);
    auto f = [&](double h) { return fam.cost(h); };
    const auto m = numeric::scan_then_golden(f, 0.5 * (rho - ub), 0.5 * (rho + ub), 401);
    if (m.fx < best.max_norm) {
      const VecN ux = target.x / rho, uy = target.y / rho;
      const double h = m.x, k = fam.k_of(m.x);
      best = make(on_complex_line(ux, uy, h, k), on_complex_line(ux, uy, rho - 2.0 * h, 0.0),
                  on_complex_line(ux, uy, h, -k));
    }
  }
  return best;
}

}  // namespace heis
