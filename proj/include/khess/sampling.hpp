#pragma once

#include "khess/symfun.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace khess {

/// Counted splittable generator: every (seed, stream) pair yields an
/// independent, reproducible mt19937_64 sequence.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    double uniform(double lo, double hi);
    double uniform01() { return uniform(0.0, 1.0); }
    double normal();
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

std::vector<double> uniform_box(Rng& rng, std::size_t n, double half_width);

/// Entries ±10^{U[-2,2]}.
std::vector<double> heavy_tailed(Rng& rng, std::size_t n);

/// Spectrum in Γ_k by rejection from [-L, L]^n.
Spectrum sample_cone_rejection(Rng& rng, std::size_t n, int k, double half_width);

/// Spectrum near ∂Γ_k: a positive spectrum pushed along a random direction to a
/// random fraction in [0.5, 1) of the distance to the cone boundary.
Spectrum sample_cone_boundary(Rng& rng, std::size_t n, int k, double half_width);

/// Alternates the two samplers.
Spectrum sample_cone(Rng& rng, std::size_t n, int k, double half_width);

/// Worker cap: KHESS_THREADS if set, otherwise hardware concurrency.
std::size_t worker_count();

/// Runs fn(chunk, begin, end) over [0, total) split into fixed-size chunks.
/// Chunk boundaries do not depend on the worker count.
void parallel_chunks(std::size_t total, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace khess
