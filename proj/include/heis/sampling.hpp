#pragma once

// Deterministic sampling helpers: per-sample RNG streams, low-discrepancy
// direction sets, and an order-preserving parallel loop.

#include "heis/core.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace heis {

std::uint64_t splitmix64(std::uint64_t x);

// Independent generator for sample `index` of a run seeded with `seed`.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index);

double uniform(std::mt19937_64& rng, double lo, double hi);
double log_uniform(std::mt19937_64& rng, double lo, double hi);
HorizontalVector random_unit(std::mt19937_64& rng, int n);
// Uniform in the box [-R, R]^{2n} x [-R^2, R^2] conditioned on gauge norm <= R.
HPoint random_in_gauge_ball(std::mt19937_64& rng, int n, double radius);

double radical_inverse(std::uint64_t i, unsigned base);

// Quasi-uniform unit directions in R^{2n}: equally spaced angles for n = 1,
// Halton points pushed to the sphere through Box-Muller for n > 1.
std::vector<HorizontalVector> sphere_directions(int n, int count);

// Unit directions inside the hyperplane orthogonal to `normal` in R^{2n}.
std::vector<HorizontalVector> hyperplane_directions(const HorizontalVector& normal, int count);

// Worker count: HEIS_JOBS if set, else the configured default, else hardware.
unsigned worker_count();
void set_default_workers(unsigned jobs);

// Runs body(i) for i in [0, count). Results must be written by index so that
// the outcome does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace heis
