#include "heis/funcs.hpp"

#include "heis/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>

namespace heis {

struct HConvexFn::Impl {
  Builtin kind;
  int n;
  std::string label;
  Eigen::MatrixXd A;         // quad
  std::optional<ExprAST> ast;  // expr
};

HConvexFn::HConvexFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {
  if (impl_->kind == Builtin::expr) mode_ = GradientMode::finite_difference;
}

namespace {

void check_n(int n) {
  if (n < 1 || n > kMaxDim) throw DimensionError("dimension n must be in [1, " + std::to_string(kMaxDim) + "]");
}

double wang_value(double x, double y) {
  const double ay = std::abs(y), ax = std::abs(x);
  if (ax == 0.0 && ay == 0.0) return 0.0;
  if (ay <= ax * ax * ax) return x * x * x * x + 1.5 * y * y / (x * x);
  const double c = std::cbrt(ay);
  return 0.5 * x * x * c * c + 2.0 * ay * c;
}

std::pair<double, double> wang_gradient(double x, double y) {
  const double ay = std::abs(y), ax = std::abs(x);
  if (ax == 0.0 && ay == 0.0) return {0.0, 0.0};
  if (ay <= ax * ax * ax) {
    const double x2 = x * x;
    return {4.0 * x2 * x - 3.0 * y * y / (x2 * x), 3.0 * y / x2};
  }
  const double c = std::cbrt(ay);
  const double sgn = y > 0.0 ? 1.0 : -1.0;
  return {x * c * c, sgn * (x * x / (3.0 * c) + 8.0 / 3.0 * c)};
}

Eigen::Map<const Eigen::VectorXd> stacked(const HPoint& p, Eigen::VectorXd& buf) {
  const int n = p.dim();
  buf.resize(2 * n);
  buf.head(n) = p.x;
  buf.tail(n) = p.y;
  return Eigen::Map<const Eigen::VectorXd>(buf.data(), buf.size());
}

}  // namespace

HConvexFn HConvexFn::sqnorm(int n) {
  check_n(n);
  return HConvexFn(std::make_shared<const Impl>(Impl{Builtin::sqnorm, n, "sqnorm", {}, std::nullopt}));
}

HConvexFn HConvexFn::sqnorm_t(int n) {
  check_n(n);
  return HConvexFn(std::make_shared<const Impl>(Impl{Builtin::sqnorm_t, n, "sqnorm_t", {}, std::nullopt}));
}

HConvexFn HConvexFn::quad(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() % 2 != 0 || A.rows() == 0)
    throw DimensionError("quad: A must be square of even size 2n");
  const int n = static_cast<int>(A.rows() / 2);
  check_n(n);
  if (!A.allFinite()) throw DomainError("quad: A has non-finite entries");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
    throw DomainError("quad: A must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
    throw DomainError("quad: A must be positive semidefinite");
  return HConvexFn(std::make_shared<const Impl>(Impl{Builtin::quad, n, "quad", A, std::nullopt}));
}

HConvexFn HConvexFn::wang() {
  return HConvexFn(std::make_shared<const Impl>(Impl{Builtin::wang, 1, "wang", {}, std::nullopt}));
}

HConvexFn HConvexFn::from_expr(const std::string& text, int n) {
  check_n(n);
  return HConvexFn(std::make_shared<const Impl>(Impl{Builtin::expr, n, text, {}, parse_expr(text, n)}));
}

int HConvexFn::dim() const { return impl_->n; }
Builtin HConvexFn::kind() const { return impl_->kind; }
std::string HConvexFn::name() const { return impl_->label; }

const Eigen::MatrixXd* HConvexFn::quad_matrix() const {
  return impl_->kind == Builtin::quad ? &impl_->A : nullptr;
}

HConvexFn HConvexFn::with_finite_differences(double h) const {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  HConvexFn g = *this;
  g.mode_ = GradientMode::finite_difference;
  g.fd_step_ = h;
  return g;
}

double HConvexFn::eval(const HPoint& p) const {
  if (p.dim() != impl_->n)
    throw DimensionError(name() + ": expects n = " + std::to_string(impl_->n) + ", got " + std::to_string(p.dim()));
  switch (impl_->kind) {
    case Builtin::sqnorm: return p.x.squaredNorm() + p.y.squaredNorm();
    case Builtin::sqnorm_t: return p.x.squaredNorm() + p.y.squaredNorm() + p.t * p.t;
    case Builtin::quad: {
      Eigen::VectorXd buf;
      const auto w = stacked(p, buf);
      return w.dot(impl_->A * w);
    }
    case Builtin::wang: return wang_value(p.x[0], p.y[0]);
    case Builtin::expr: return impl_->ast->eval(p);
  }
  return 0.0;
}

HorizontalVector HConvexFn::fd_gradient(const HPoint& p, double h) const {
  const int n = p.dim();
  HorizontalVector g(n);
  HorizontalVector e(n);
  for (int j = 0; j < 2 * n; ++j) {
    e.v.setZero();
    e.v[j] = h;
    const double fp = eval(exp_horizontal(p, e));
    const double fm = eval(exp_horizontal(p, -e));
    g.v[j] = (fp - fm) / (2.0 * h);
  }
  if (!g.v.allFinite()) throw NumericalFailure(name() + ": non-finite horizontal gradient at " + to_string(p));
  return g;
}

HorizontalVector HConvexFn::horizontal_gradient(const HPoint& p) const {
  if (p.dim() != impl_->n) throw DimensionError(name() + ": dimension mismatch in gradient");
  if (mode_ == GradientMode::finite_difference) return fd_gradient(p, fd_step_);
  switch (impl_->kind) {
    case Builtin::sqnorm: return HorizontalVector(VecN(2.0 * p.x), VecN(2.0 * p.y));
    case Builtin::sqnorm_t:
      return HorizontalVector(VecN(2.0 * p.x + 4.0 * p.t * p.y), VecN(2.0 * p.y - 4.0 * p.t * p.x));
    case Builtin::quad: {
      Eigen::VectorXd buf;
      const auto w = stacked(p, buf);
      return HorizontalVector(Vec2N(2.0 * (impl_->A * w)));
    }
    case Builtin::wang: {
      const auto [gx, gy] = wang_gradient(p.x[0], p.y[0]);
      return HorizontalVector{gx, gy};
    }
    case Builtin::expr: return fd_gradient(p, fd_step_);
  }
  return HorizontalVector(p.dim());
}

LineRestriction::LineRestriction(HConvexFn f, HPoint p, HorizontalVector v)
    : f_(std::move(f)), p_(std::move(p)), v_(std::move(v)) {}

LineRestriction restrict_to_line(const HConvexFn& f, const HPoint& p, const HorizontalVector& v) {
  if (v.dim() != p.dim()) throw DimensionError("restrict_to_line: dimension mismatch");
  if (v.norm() == 0.0) throw DomainError("restrict_to_line: direction must be nonzero");
  return LineRestriction(f, p, v);
}

ConvexityReport check_h_convexity(const HConvexFn& f, std::size_t n_points, std::size_t n_dirs,
                                  std::uint64_t seed, const ConvexityOptions& opts) {
  if (n_points == 0 || n_dirs == 0) throw DomainError("check_h_convexity: counts must be positive");
  const int n = f.dim();
  std::vector<std::vector<ConvexityViolation>> found(n_points);
  std::vector<double> worst(n_points, 0.0);
  parallel_for(n_points, [&](std::size_t i) {
    auto rng = stream(seed, i);
    const HPoint xi = random_in_gauge_ball(rng, n, opts.box_radius);
    const double f1 = f(xi);
    for (std::size_t k = 0; k < n_dirs; ++k) {
      const HorizontalVector v = random_unit(rng, n) * uniform(rng, 1e-3, opts.step_scale);
      const double lambda = uniform(rng, 0.0, 1.0);
      const double f2 = f(exp_horizontal(xi, v));
      const double fm = f(exp_horizontal(xi, v * lambda));
      const double defect = fm - ((1.0 - lambda) * f1 + lambda * f2);
      const double rel = defect / (1.0 + std::abs(f1) + std::abs(f2));
      worst[i] = std::max(worst[i], defect);
      if (rel > opts.tol) found[i].push_back({xi, v, lambda, defect});
    }
  });
  ConvexityReport rep;
  rep.samples = n_points * n_dirs;
  for (std::size_t i = 0; i < n_points; ++i) {
    rep.max_defect = std::max(rep.max_defect, worst[i]);
    for (auto& v : found[i]) rep.violations.push_back(std::move(v));
  }
  return rep;
}

}  // namespace heis
