#pragma once

// Small one-dimensional minimizers shared by the geometric searches.

#include <cmath>
#include <functional>
#include <utility>

namespace heis::numeric {

struct Min1D {
  double x;
  double fx;
};

inline constexpr double kInvPhi = 0.6180339887498948482;

// Golden-section search on [lo, hi]; assumes the function is unimodal there.
template <class F>
Min1D golden_min(F&& f, double lo, double hi, int max_iters = 200, double rel_tol = 1e-12) {
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iters; ++it) {
    if (std::abs(hi - lo) <= rel_tol * (std::abs(c) + std::abs(d)) + 1e-300) break;
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? Min1D{c, fc} : Min1D{d, fd};
}

// Uniform scan of `samples` points followed by golden refinement inside the
// bracket of the best sample.
template <class F>
Min1D scan_then_golden(F&& f, double lo, double hi, int samples, int golden_iters = 200,
                       double rel_tol = 1e-12) {
  if (samples < 3) samples = 3;
  const double step = (hi - lo) / (samples - 1);
  Min1D best{lo, f(lo)};
  int best_i = 0;
  for (int i = 1; i < samples; ++i) {
    const double x = lo + step * i;
    const double fx = f(x);
    if (fx < best.fx) {
      best = {x, fx};
      best_i = i;
    }
  }
  const double a = lo + step * std::max(best_i - 1, 0);
  const double b = lo + step * std::min(best_i + 1, samples - 1);
  const Min1D g = golden_min(f, a, b, golden_iters, rel_tol);
  return g.fx < best.fx ? g : best;
}

}  // namespace heis::numeric
