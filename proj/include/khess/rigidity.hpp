#pragma once

#include "khess/grid.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace khess {

using Evaluator = std::function<double(const Point&)>;

/// Candidate entire solution with a quadratic growth certificate u ≥ c|x|² − b.
struct EntireCandidate {
    enum class Kind { quadratic, perturbed_quadratic, custom };

    Kind kind = Kind::custom;
    int dim = 2;
    Evaluator u;
    double c = 0.0;
    double b = 0.0;
    std::string name = "custom";

    /// c_k|x|²/2 with C(n,k)c_k^k = 1; growth constants c = c_k/4, b = 0.
    static EntireCandidate quadratic(int dim, int k);
    /// c_k|x|²/2 + amplitude·sin(x_1); growth constants c = c_k/4, b = 1.
    static EntireCandidate perturbed_quadratic(int dim, int k, double amplitude = 0.1);

    /// sqrt((1 + b)/c): every sublevel set {u(Ry) ≤ R²} lies in this ball.
    double bounding_radius() const;
};

/// v(y) = (u(Ry) − R²)/R².
Evaluator rescale(const EntireCandidate& candidate, double R);

struct GrowthCertificate {
    bool holds = true;
    std::optional<Point> witness;
    std::size_t points = 0;
};

/// Checks u(x) ≥ c|x|² − b at `per_sphere` random points on each sphere.
GrowthCertificate growth_certificate(const EntireCandidate& candidate, double c, double b,
                                     std::span<const double> radii, std::uint64_t seed, int per_sphere = 64);

struct SublevelMask {
    GridDomain domain;
    std::vector<std::uint8_t> inside;
    double radius = 0.0;  // largest |y| over inside nodes
};

/// Nodes of {y : u(Ry) ≤ q·R²} on a cube of half-width bounding_radius(). Throws
/// GrowthViolation when the set reaches the box boundary.
SublevelMask sublevel_domain(const EntireCandidate& candidate, double R, double q, int resolution);

struct RigidityOptions {
    int k = 2;
    std::vector<double> schedule{2.0, 4.0, 8.0, 16.0};
    int resolution = 129;
    double beta = 1.0;
    double tol = 1e-9;
    // Oscillations at or below this level are solver noise and stay out of the fit.
    double noise_floor = 1e-9;
    std::uint64_t seed = 0;
};

struct RigidityLevel {
    double R = 0.0;
    bool solved = false;
    double spacing = 0.0;
    std::size_t nodes = 0;        // active nodes of Ω_R
    std::size_t inner_nodes = 0;  // nodes of the inner region
    double sup_lap = 0.0;         // sup |Δv| on the inner region
    double osc = 0.0;             // max over Hessian entries of (max − min) on the inner region
    double interior_bound = 0.0;  // max (−v)^β Δv on Ω_R
    double max_inner_v = 0.0;     // max v on the inner region
    int iterations = 0;
    double residual = 0.0;
    bool in_fit = false;
    double exponent_so_far = 0.0;  // NaN until two points are in the fit
};

struct RigidityTrace {
    std::string candidate;
    int dim = 2;
    int k = 2;
    int resolution = 0;
    double beta = 1.0;
    std::vector<RigidityLevel> levels;
    double exponent = 0.0;  // NaN when fewer than two levels are usable
    bool partial = false;
};

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Solves σ_k(D²v) = 1 on Ω_R with the rescaled candidate as boundary data for
/// each R and records Hessian statistics on Ω'_R = {u(Ry) ≤ R²/2}.
RigidityTrace rigidity_experiment(const EntireCandidate& candidate, const RigidityOptions& opts);

}  // namespace khess
