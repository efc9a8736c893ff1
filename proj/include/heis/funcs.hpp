#pragma once

// H-convex function layer: built-ins, parsed expressions, horizontal
// gradients and sampled convexity checks.

#include "heis/core.hpp"
#include "heis/expr.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace heis {

enum class Builtin { sqnorm, sqnorm_t, quad, wang, expr };

enum class GradientMode { analytic, finite_difference };

class HConvexFn {
 public:
  // ||x||^2 + ||y||^2
  static HConvexFn sqnorm(int n);
  // ||x||^2 + ||y||^2 + t^2
  static HConvexFn sqnorm_t(int n);
  // w^T A w with w = (x, y); A symmetric positive semidefinite of size 2n.
  static HConvexFn quad(const Eigen::MatrixXd& A);
  // Wang's strictly convex function of (x, y) on H^1, constant in t:
  //   x^4 + 3 y^2 / (2 x^2)           if |y| <= |x|^3
  //   x^2 |y|^{2/3} / 2 + 2 |y|^{4/3}  otherwise
  static HConvexFn wang();
  static HConvexFn from_expr(const std::string& text, int n);

  int dim() const;
  Builtin kind() const;
  std::string name() const;
  GradientMode gradient_mode() const { return mode_; }
  double fd_step() const { return fd_step_; }

  // Same function, gradients by central differences with step h.
  HConvexFn with_finite_differences(double h = 1e-5) const;

  double operator()(const HPoint& p) const { return eval(p); }
  double eval(const HPoint& p) const;
  // (X_1 f, ..., X_n f, Y_1 f, ..., Y_n f)(p) with X_j = d_xj + 2 y_j d_t,
  // Y_j = d_yj - 2 x_j d_t.
  HorizontalVector horizontal_gradient(const HPoint& p) const;
  HorizontalVector fd_gradient(const HPoint& p, double h) const;

  const Eigen::MatrixXd* quad_matrix() const;

 private:
  struct Impl;
  explicit HConvexFn(std::shared_ptr<const Impl> impl);

  std::shared_ptr<const Impl> impl_;
  GradientMode mode_ = GradientMode::analytic;
  double fd_step_ = 1e-5;
};

// alpha -> f(p o exp(alpha v)).
class LineRestriction {
 public:
  LineRestriction(HConvexFn f, HPoint p, HorizontalVector v);
  double operator()(double alpha) const { return f_(exp_horizontal(p_, v_ * alpha)); }

 private:
  HConvexFn f_;
  HPoint p_;
  HorizontalVector v_;
};

LineRestriction restrict_to_line(const HConvexFn& f, const HPoint& p, const HorizontalVector& v);

struct ConvexityViolation {
  HPoint xi;
  HorizontalVector v;
  double lambda;
  double defect;
};

struct ConvexityReport {
  std::size_t samples = 0;
  std::vector<ConvexityViolation> violations;
  double max_defect = 0.0;  // max over samples of the (relative) defect, clamped at 0
};

struct ConvexityOptions {
  double box_radius = 10.0;  // gauge ball for the base points
  double step_scale = 5.0;   // horizontal step lengths drawn up to this
  double tol = 1e-9;         // relative to 1 + |f(xi1)| + |f(xi2)|
};

ConvexityReport check_h_convexity(const HConvexFn& f, std::size_t n_points, std::size_t n_dirs,
                                  std::uint64_t seed, const ConvexityOptions& opts = {});

}  // namespace heis
