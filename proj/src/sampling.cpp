#include "khess/sampling.hpp"

#include "khess/cone.hpp"
#include "khess/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace khess {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finaliser over the combined key
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

double Rng::uniform(double lo, double hi) {
    // 53 random bits; std::uniform_real_distribution is not portable across libraries.
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double Rng::normal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::vector<double> uniform_box(Rng& rng, std::size_t n, double half_width) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-half_width, half_width);
    return v;
}

std::vector<double> heavy_tailed(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) {
        const double mag = std::pow(10.0, rng.uniform(-2.0, 2.0));
        x = rng.uniform01() < 0.5 ? -mag : mag;
    }
    return v;
}

Spectrum sample_cone_rejection(Rng& rng, std::size_t n, int k, double half_width) {
    if (k < 1 || k > static_cast<int>(n)) throw DomainError("sample_cone: k outside 1..n");
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        auto v = uniform_box(rng, n, half_width);
        if (in_cone(v, k)) return Spectrum(std::move(v));
    }
    throw DomainError("sample_cone_rejection: acceptance rate too low");
}

Spectrum sample_cone_boundary(Rng& rng, std::size_t n, int k, double half_width) {
    if (k < 1 || k > static_cast<int>(n)) throw DomainError("sample_cone: k outside 1..n");
    std::vector<double> base(n), dir(n), point(n);
    for (double& x : base) x = rng.uniform(0.05, 1.0) * half_width;
    for (double& x : dir) x = rng.uniform(-1.0, 1.0) * half_width;

    auto at = [&](double s) {
        for (std::size_t i = 0; i < n; ++i) point[i] = base[i] + s * dir[i];
        return in_cone(point, k);
    };
    // Γ_k is convex and contains `base`, so {s ≥ 0 : base + s·dir ∈ Γ_k} is an interval.
    double lo = 0.0, hi = 1.0;
    while (at(hi) && hi < 1e6) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) ? lo : hi) = mid;
    }
    const double s = lo * rng.uniform(0.5, 1.0);
    at(s);
    if (!in_cone(point, k)) at(0.0);
    return Spectrum(point);
}

Spectrum sample_cone(Rng& rng, std::size_t n, int k, double half_width) {
    if (rng.uniform01() < 0.5) return sample_cone_rejection(rng, n, k, half_width);
    return sample_cone_boundary(rng, n, k, half_width);
}

std::size_t worker_count() {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("KHESS_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
    }
    return hw;
}

void parallel_chunks(std::size_t total, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t chunks = (total + chunk - 1) / chunk;
    const std::size_t workers = std::min(worker_count(), chunks);
    auto body = [&](std::size_t c) { fn(c, c * chunk, std::min(total, (c + 1) * chunk)); };
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < chunks; c = next++) {
                try {
                    body(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace khess
