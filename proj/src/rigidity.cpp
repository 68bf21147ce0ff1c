#include "khess/rigidity.hpp"

#include "khess/error.hpp"
#include "khess/radial.hpp"
#include "khess/sampling.hpp"
#include "khess/solver.hpp"
#include "khess/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace khess {

namespace {

double norm2(const Point& x, int n) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += x[a] * x[a];
    return s;
}

}  // namespace

EntireCandidate EntireCandidate::quadratic(int dim, int k) {
    const double ck = radial_coefficient(dim, k, 1.0);
    EntireCandidate c;
    c.kind = Kind::quadratic;
    c.dim = dim;
    c.u = [ck, dim](const Point& x) { return 0.5 * ck * norm2(x, dim); };
    c.c = 0.25 * ck;
    c.b = 0.0;
    c.name = "quadratic";
    return c;
}

EntireCandidate EntireCandidate::perturbed_quadratic(int dim, int k, double amplitude) {
    const double ck = radial_coefficient(dim, k, 1.0);
    EntireCandidate c;
    c.kind = Kind::perturbed_quadratic;
    c.dim = dim;
    c.u = [ck, dim, amplitude](const Point& x) { return 0.5 * ck * norm2(x, dim) + amplitude * std::sin(x[0]); };
    c.c = 0.25 * ck;
    c.b = 1.0;
    c.name = "perturbed-quadratic";
    return c;
}

double EntireCandidate::bounding_radius() const {
    if (!(c > 0.0) || b < 0.0) throw DomainError("EntireCandidate: need c > 0 and b >= 0");
    return std::sqrt((1.0 + b) / c);
}

Evaluator rescale(const EntireCandidate& candidate, double R) {
    if (!(R > 0.0)) throw DomainError("rescale: R must be positive");
    const Evaluator u = candidate.u;
    const int n = candidate.dim;
    return [u, R, n](const Point& y) {
        Point x{};
        for (int a = 0; a < n; ++a) x[a] = R * y[a];
        return (u(x) - R * R) / (R * R);
    };
}

GrowthCertificate growth_certificate(const EntireCandidate& candidate, double c, double b,
                                     std::span<const double> radii, std::uint64_t seed, int per_sphere) {
    const int n = candidate.dim;
    GrowthCertificate out;
    Rng rng(seed, 0x67726f77);
    for (double r : radii) {
        if (!(r > 0.0)) throw DomainError("growth_certificate: radii must be positive");
        for (int p = 0; p < per_sphere; ++p) {
            Point x{};
            double len = 0.0;
            while (len < 1e-12) {
                for (int a = 0; a < n; ++a) x[a] = rng.normal();
                len = std::sqrt(norm2(x, n));
            }
            for (int a = 0; a < n; ++a) x[a] *= r / len;
            ++out.points;
            if (candidate.u(x) < c * r * r - b) {
                out.holds = false;
                out.witness = x;
                return out;
            }
        }
    }
    return out;
}

SublevelMask sublevel_domain(const EntireCandidate& candidate, double R, double q, int resolution) {
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("sublevel_domain: q must lie in (0, 1]");
    const double rho = candidate.bounding_radius();
    const Evaluator v = rescale(candidate, R);
    SublevelMask out{GridDomain::cube(candidate.dim, -rho, rho, resolution), {}, 0.0};
    const GridDomain& g = out.domain;
    out.inside.assign(g.node_count(), 0);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const Point y = g.position(i);
        // u(Ry) ≤ qR²  ⇔  v(y) ≤ q − 1
        if (v(y) <= q - 1.0) {
            if (g.on_box_boundary(i)) throw GrowthViolation("sublevel_domain: sublevel set reaches the bounding box");
            out.inside[i] = 1;
            out.radius = std::max(out.radius, std::sqrt(norm2(y, candidate.dim)));
        }
    }
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t m = std::min(x.size(), y.size());
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = m * sxx - sx * sx;
    return den > 0.0 ? (m * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
}

RigidityTrace rigidity_experiment(const EntireCandidate& candidate, const RigidityOptions& opts) {
    const int n = candidate.dim;
    if (opts.k < 1 || opts.k > n) throw DomainError("rigidity_experiment: k outside 1..dim");
    if (opts.schedule.empty()) throw DomainError("rigidity_experiment: empty schedule");
    for (std::size_t i = 0; i < opts.schedule.size(); ++i) {
        if (!(opts.schedule[i] > 0.0)) throw DomainError("rigidity_experiment: R must be positive");
        if (i > 0 && !(opts.schedule[i] > opts.schedule[i - 1]))
            throw DomainError("rigidity_experiment: schedule must increase");
    }

    const double rho = candidate.bounding_radius();
    std::vector<double> radii;
    for (double r = 0.5; r < opts.schedule.back() * rho; r *= 1.5) radii.push_back(r);
    radii.push_back(opts.schedule.back() * rho);
    const GrowthCertificate cert = growth_certificate(candidate, candidate.c, candidate.b, radii, opts.seed);
    if (!cert.holds) throw GrowthViolation("rigidity_experiment: growth certificate fails");

    RigidityTrace trace;
    trace.candidate = candidate.name;
    trace.dim = n;
    trace.k = opts.k;
    trace.resolution = opts.resolution;
    trace.beta = opts.beta;
    std::vector<double> fit_r, fit_osc;

    for (double R : opts.schedule) {
        const SublevelMask outer = sublevel_domain(candidate, R, 1.0, opts.resolution);
        const SublevelMask inner = sublevel_domain(candidate, R, 0.5, opts.resolution);
        const GridDomain& g = outer.domain;
        const Evaluator v = rescale(candidate, R);
        std::vector<double> values(g.node_count());
        std::vector<std::uint8_t> pinned(g.node_count());
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            values[i] = v(g.position(i));
            pinned[i] = outer.inside[i] ? 0 : 1;
        }
        const ScalarField data(g, std::move(values), std::move(pinned));
        const ScalarField start = initial_guess(data, RhsSpec::constant(1.0), opts.k);

        RigidityLevel level;
        level.R = R;
        level.spacing = g.spacing();
        level.nodes = start.active_nodes().size();
        level.exponent_so_far = std::numeric_limits<double>::quiet_NaN();
        SolveOptions so;
        so.k = opts.k;
        so.tol = opts.tol;
        try {
            const SolveResult res = solve(start, RhsSpec::constant(1.0), so);
            level.solved = true;
            level.iterations = res.report.iterations;
            level.residual = res.report.final_residual;
            const ScalarField& u = res.field;

            std::vector<double> lo(n * n, std::numeric_limits<double>::infinity());
            std::vector<double> hi(n * n, -std::numeric_limits<double>::infinity());
            level.max_inner_v = -std::numeric_limits<double>::infinity();
            for (std::size_t i : u.active_nodes()) {
                const SymMatrix H = discrete_hessian(u, i);
                const double lap = H.trace();
                level.interior_bound = std::max(level.interior_bound, std::pow(std::max(0.0, -u[i]), opts.beta) * lap);
                if (!inner.inside[i]) continue;
                ++level.inner_nodes;
                level.sup_lap = std::max(level.sup_lap, std::abs(lap));
                level.max_inner_v = std::max(level.max_inner_v, u[i]);
                for (int p = 0; p < n; ++p)
                    for (int q = p; q < n; ++q) {
                        lo[p * n + q] = std::min(lo[p * n + q], H(p, q));
                        hi[p * n + q] = std::max(hi[p * n + q], H(p, q));
                    }
            }
            for (int p = 0; p < n; ++p)
                for (int q = p; q < n; ++q) level.osc = std::max(level.osc, hi[p * n + q] - lo[p * n + q]);
            if (level.osc > opts.noise_floor) {
                level.in_fit = true;
                fit_r.push_back(R);
                fit_osc.push_back(level.osc);
                level.exponent_so_far = loglog_slope(fit_r, fit_osc);
            }
        } catch (const SolveError& e) {
            level.iterations = e.report().iterations;
            level.residual = e.report().final_residual;
            trace.partial = true;
        }
        trace.levels.push_back(level);
    }
    trace.exponent = loglog_slope(fit_r, fit_osc);
    return trace;
}

}  // namespace khess
