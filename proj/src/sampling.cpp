#include "heis/sampling.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace heis {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

// Explicit transforms instead of std:: distributions, whose output is not
// specified across standard library implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

namespace {

double gaussian(std::mt19937_64& rng) {
  double u1 = uniform(rng, 0.0, 1.0);
  while (u1 <= 0.0) u1 = uniform(rng, 0.0, 1.0);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

HorizontalVector random_unit(std::mt19937_64& rng, int n) {
  HorizontalVector v(n);
  do {
    for (int i = 0; i < 2 * n; ++i) v.v[i] = gaussian(rng);
  } while (v.norm() < 1e-12);
  v.v /= v.norm();
  return v;
}

HPoint random_in_gauge_ball(std::mt19937_64& rng, int n, double radius) {
  std::vector<double> c(static_cast<size_t>(2 * n + 1));
  for (;;) {
    for (int i = 0; i < 2 * n; ++i) c[static_cast<size_t>(i)] = uniform(rng, -radius, radius);
    c.back() = uniform(rng, -radius * radius, radius * radius);
    HPoint p(c);
    if (gauge_norm(p) <= radius) return p;
  }
}

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

std::vector<HorizontalVector> sphere_directions(int n, int count) {
  std::vector<HorizontalVector> dirs;
  dirs.reserve(static_cast<size_t>(count));
  if (n == 1) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      dirs.push_back(HorizontalVector{std::cos(th), std::sin(th)});
    }
    return dirs;
  }
  const int d = 2 * n;
  for (int k = 0; k < count; ++k) {
    HorizontalVector v(n);
    for (int j = 0; j < d; j += 2) {
      double u1 = radical_inverse(static_cast<std::uint64_t>(k) + 1, kPrimes[j]);
      const double u2 = radical_inverse(static_cast<std::uint64_t>(k) + 1, kPrimes[j + 1]);
      u1 = std::max(u1, 1e-300);
      const double rad = std::sqrt(-2.0 * std::log(u1));
      v.v[j] = rad * std::cos(2.0 * std::numbers::pi * u2);
      v.v[j + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
    }
    v.v /= v.norm();
    dirs.push_back(v);
  }
  return dirs;
}

std::vector<HorizontalVector> hyperplane_directions(const HorizontalVector& normal, int count) {
  const int n = normal.dim();
  const double nn = normal.norm();
  std::vector<HorizontalVector> out;
  if (nn == 0.0) return sphere_directions(n, count);
  const Vec2N unit = normal.v / nn;
  for (const auto& d : sphere_directions(n, count * 2)) {
    Vec2N w = d.v - unit * unit.dot(d.v);
    const double wn = w.norm();
    if (wn < 1e-8) continue;
    out.emplace_back(Vec2N(w / wn));
    if (static_cast<int>(out.size()) == count) break;
  }
  return out;
}

namespace {
std::atomic<unsigned> g_default_workers{0};
}

void set_default_workers(unsigned jobs) { g_default_workers = jobs; }

unsigned worker_count() {
  if (const char* env = std::getenv("HEIS_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  if (g_default_workers > 0) return g_default_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        // Report the lowest failing index so errors are reproducible.
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace heis
