#include "khess/estimates.hpp"

#include "khess/cone.hpp"
#include "khess/error.hpp"
#include "khess/sampling.hpp"
#include "khess/symeig.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace khess {

namespace {

constexpr double kPositiveSlack = 1e-12;

std::string fmt(const char* spec, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

double squared_norm(const Point& p, int n) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += p[a] * p[a];
    return s;
}

double minus_u(const ScalarField& u, std::size_t node) {
    if (u[node] > kPositiveSlack) throw DomainError("estimate quantity: u must be nonpositive in the interior");
    return std::max(0.0, -u[node]);
}

template <class F>
NodeMax node_max(const ScalarField& u, F&& value) {
    NodeMax best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t i : u.active_nodes()) {
        const double v = value(i);
        if (v > best.value) {
            best.value = v;
            best.node = i;
        }
    }
    if (!std::isfinite(best.value)) throw DomainError("estimate quantity: no active nodes");
    best.location = u.domain().position(best.node);
    return best;
}

Spectrum absolute(const Spectrum& lam) {
    std::vector<double> v(lam.values().begin(), lam.values().end());
    for (double& x : v) x = std::abs(x);
    return Spectrum(std::move(v));
}

// First and second directional derivatives of σ_m along a diagonal slice; m = 0 allowed.
struct Directional {
    double d1 = 0.0;
    double d2 = 0.0;
};

Directional directional(int m, const Spectrum& lam, std::span<const double> h) {
    Directional out;
    if (m == 0) return out;
    const std::size_t n = lam.size();
    for (std::size_t p = 0; p < n; ++p) {
        out.d1 += sigma_d1(m, lam, p) * h[p];
        for (std::size_t q = 0; q < n; ++q)
            if (p != q) out.d2 += sigma_d2(m, lam, p, q) * h[p] * h[q];
    }
    return out;
}

struct ConcavityTerms {
    double sk, sl, alpha;
    Directional k, l;          // at λ, h
    Directional k_abs, l_abs;  // at |λ|, |h|, for the scale
};

ConcavityTerms concavity_terms(int k, int l, const Spectrum& lam, std::span<const double> slice) {
    const int n = static_cast<int>(lam.size());
    if (l < 0 || l >= k || k > n) throw DomainError("concavity inequality: need 0 <= l < k <= n");
    if (slice.size() != lam.size()) throw DomainError("concavity inequality: slice dimension mismatch");
    ConcavityTerms t;
    t.sk = sigma(k, lam);
    t.sl = sigma(l, lam);
    if (!(t.sl > 0.0)) throw DomainError("concavity inequality: sigma_l must be positive");
    if (!(t.sk > 0.0)) throw DomainError("concavity inequality: sigma_k must be positive");
    t.alpha = 1.0 / (k - l);
    std::vector<double> habs(slice.begin(), slice.end());
    for (double& x : habs) x = std::abs(x);
    const Spectrum labs = absolute(lam);
    t.k = directional(k, lam, slice);
    t.l = directional(l, lam, slice);
    t.k_abs = directional(k, labs, habs);
    t.l_abs = directional(l, labs, habs);
    return t;
}

void check_pair(std::size_t i, std::size_t j, std::size_t n, const char* what) {
    if (i >= n || j >= n || i == j) throw DomainError(std::string(what) + ": need distinct indices below n");
}

Witness witness_of(const Spectrum& lam, std::span<const double> slice, const Gap& g, std::string detail) {
    return {std::vector<double>(lam.values().begin(), lam.values().end()),
            std::vector<double>(slice.begin(), slice.end()), g.gap, g.scale, std::move(detail)};
}

// Per-chunk partial results merged in chunk order, so output is independent of scheduling.
struct Tally {
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::optional<Witness> witness;

    void record(const Gap& g, double rel, const std::function<Witness()>& make) {
        ++checks;
        const double r = g.scale > 0.0 ? g.gap / g.scale : (g.gap < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0);
        worst = std::min(worst, r);
        if (!g.holds(rel)) {
            ++violations;
            if (!witness) witness = make();
        }
    }
};

constexpr std::size_t kChunk = 500;

SuiteResult run_suite(std::string name, std::size_t samples, std::uint64_t seed,
                      const std::function<void(Rng&, std::size_t, Tally&)>& sample) {
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<Tally> parts(chunks);
    parallel_chunks(samples, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Rng rng(seed, c);
        for (std::size_t s = begin; s < end; ++s) sample(rng, s, parts[c]);
    });
    SuiteResult out;
    out.name = std::move(name);
    out.samples = samples;
    out.worst = std::numeric_limits<double>::infinity();
    for (auto& p : parts) {
        out.checks += p.checks;
        out.violations += p.violations;
        out.worst = std::min(out.worst, p.worst);
        if (!out.witness && p.witness) out.witness = std::move(p.witness);
    }
    if (out.checks == 0) out.worst = 0.0;
    return out;
}

std::vector<double> draw_slice(Rng& rng, std::size_t n, std::size_t sample) {
    return sample % 2 == 0 ? uniform_box(rng, n, 1.0) : heavy_tailed(rng, n);
}

// Sorted λ ∈ Γ_{μ+2} whose (μ+1)-th entry is at most a tenth of the first.
Spectrum draw_separated(Rng& rng, int n, int mu) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int attempt = 0; attempt < 100000; ++attempt) {
        for (int i = 0; i < mu; ++i) v[i] = rng.uniform(0.1, 1.0);
        const double top = *std::max_element(v.begin(), v.begin() + mu);
        for (int i = mu; i < n; ++i) v[i] = rng.uniform(-0.1, 0.1) * top;
        std::sort(v.begin(), v.end(), std::greater<>());
        if (v[mu] <= 0.1 * v[0] && in_cone(v, mu + 2)) return Spectrum(v);
    }
    throw DomainError("growth_claims_suite: sampler failed to reach the cone");
}

}  // namespace

void PogorelovConfig::validate() const {
    if (!(beta >= 0.0) || !(eps >= 0.0) || !(a >= 0.0) || !(N >= 0.0))
        throw DomainError("PogorelovConfig: beta, eps, a, N must be nonnegative");
    if (m < 2) throw DomainError("PogorelovConfig: m must be at least 2");
}

NodeMax pogorelov_sigma2_quantity(const ScalarField& u, const PogorelovConfig& cfg) {
    cfg.validate();
    const int n = u.domain().dim();
    return node_max(u, [&](std::size_t i) {
        const double w = minus_u(u, i);
        const double top = symmetric_eigenvalues(discrete_hessian(u, i)).front();
        const Point x = u.domain().position(i);
        const double weight =
            std::exp(0.5 * cfg.eps * squared_norm(discrete_gradient(u, i), n) + 0.5 * cfg.a * squared_norm(x, n));
        return std::pow(w, cfg.beta) * weight * top;
    });
}

NodeMax theorem2_quantity(const ScalarField& u) {
    return node_max(u, [&](std::size_t i) { return minus_u(u, i) * discrete_hessian(u, i).trace(); });
}

NodalValues pm_quantity(const ScalarField& u, double K0, int m) {
    if (m < 1) throw DomainError("pm_quantity: m must be positive");
    NodalValues out;
    out.nodes = u.active_nodes();
    out.values.reserve(out.nodes.size());
    for (std::size_t i : out.nodes) {
        double p = 0.0;
        for (double lam : symmetric_eigenvalues(discrete_hessian(u, i))) {
            const double kappa = lam + K0;
            if (kappa < -1e-10) throw AdmissibilityError("pm_quantity: shifted eigenvalue is negative");
            p += std::pow(std::max(kappa, 0.0), m);
        }
        out.values.push_back(p);
    }
    return out;
}

ShiftFieldCheck shift_field_check(const ScalarField& u, int k, double sup_f, double tol) {
    const int n = u.domain().dim();
    ShiftFieldCheck out;
    out.K0 = compute_shift(sup_f, n, k).K0;
    out.min_eigenvalue = std::numeric_limits<double>::infinity();
    const int level = std::min(k + 1, n);
    for (std::size_t i : u.active_nodes()) {
        const auto eig = symmetric_eigenvalues(discrete_hessian(u, i));
        if (!in_cone(eig, level)) {
            ++out.skipped;
            continue;
        }
        ++out.checked;
        if (eig.back() < out.min_eigenvalue) {
            out.min_eigenvalue = eig.back();
            out.witness = u.domain().position(i);
        }
    }
    out.passed = out.checked == 0 || out.min_eigenvalue >= -out.K0 - tol;
    return out;
}

BracketCheck bracketing_check(const ScalarField& u, const RhsSpec& rhs, int k) {
    const QuadraticBarrier w = subsolution_quadratic(u, rhs, k);
    BracketCheck out;
    for (std::size_t i : u.active_nodes()) {
        out.above_zero = std::max(out.above_zero, u[i]);
        out.below_barrier = std::max(out.below_barrier, w(u.domain().position(i)) - u[i]);
    }
    return out;
}

Gap guan_inequality_17_check(int k, int l, const Spectrum& lam, std::span<const double> slice) {
    const ConcavityTerms t = concavity_terms(k, l, lam, slice);
    const double Ak = t.k.d1 / t.sk, Al = t.l.d1 / t.sl;
    const double lhs = -t.k.d2 / t.sk + t.l.d2 / t.sl;
    const double rhs = (Ak - Al) * ((t.alpha - 1.0) * Ak - (t.alpha + 1.0) * Al);
    const double ak = t.k_abs.d1 / t.sk, al = t.l_abs.d1 / t.sl;
    const double scale =
        t.k_abs.d2 / t.sk + t.l_abs.d2 / t.sl + (ak + al) * (std::abs(t.alpha - 1.0) * ak + (t.alpha + 1.0) * al);
    return {lhs - rhs, scale};
}

Gap guan_inequality_18_check(int k, int l, const Spectrum& lam, std::span<const double> slice, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("concavity inequality: delta must lie in (0, 1)");
    const ConcavityTerms t = concavity_terms(k, l, lam, slice);
    const double c1 = 1.0 - t.alpha + t.alpha / delta;
    const double c2 = t.alpha + 1.0 - delta * t.alpha;
    const double Al = t.l.d1 / t.sl;
    const double lhs = -t.k.d2 + c1 * t.k.d1 * t.k.d1 / t.sk;
    const double rhs = t.sk * c2 * Al * Al - (t.sk / t.sl) * t.l.d2;
    const double al = t.l_abs.d1 / t.sl;
    const double scale = t.k_abs.d2 + std::abs(c1) * t.k_abs.d1 * t.k_abs.d1 / t.sk + t.sk * std::abs(c2) * al * al +
                         (t.sk / t.sl) * t.l_abs.d2;
    return {lhs - rhs, scale};
}

Gap shifted_second_derivative_check(const Spectrum& lam, double K0, int k, std::size_t i, std::size_t j) {
    const std::size_t n = lam.size();
    check_pair(i, j, n, "shifted_second_derivative_check");
    if (k < 1 || k > static_cast<int>(n)) throw DomainError("shifted_second_derivative_check: k outside 1..n");
    double top = 1.0;
    for (double x : lam.values()) top = std::max(top, std::abs(x));
    for (double x : lam.values())
        if (x + K0 < -kPositiveSlack * top) throw DomainError("shifted_second_derivative_check: lambda + K0 must be nonnegative");
    const double kappa_j = lam[j] + K0;
    const double lhs = kappa_j * sigma_d2(k, lam, j, i) + sigma_d1(k, lam, j);
    const Spectrum labs = absolute(lam);
    const double scale = std::abs(kappa_j) * sigma_d2(k, labs, j, i) + sigma_d1(k, labs, j) + sigma_d1(k, labs, i);
    return {lhs - sigma_d1(k, lam, i), scale};
}

Gap newton_inequality_check(const Spectrum& lam, int mu, std::size_t a, std::size_t b) {
    const std::size_t n = lam.size();
    check_pair(a, b, n, "newton_inequality_check");
    if (mu < 2 || mu > static_cast<int>(n) - 2) throw DomainError("newton_inequality_check: need 2 <= mu <= n-2");
    const double s1 = sigma_restricted(mu - 1, lam, {a, b});
    const double s0 = sigma_restricted(mu, lam, {a, b});
    const double s2 = sigma_restricted(mu - 2, lam, {a, b});
    const Spectrum labs = absolute(lam);
    const double t1 = sigma_restricted(mu - 1, labs, {a, b});
    const double scale = t1 * t1 + sigma_restricted(mu, labs, {a, b}) * sigma_restricted(mu - 2, labs, {a, b});
    return {s1 * s1 - s0 * s2, scale};
}

GrowthClaims restricted_growth_claims_check(const Spectrum& lam_in, int mu, std::size_t a, std::size_t b) {
    const Spectrum lam = lam_in.sorted();
    const int n = static_cast<int>(lam.size());
    if (mu < 1 || mu + 2 > n) throw DomainError("restricted_growth_claims_check: need 1 <= mu <= n-2");
    check_pair(a, b, static_cast<std::size_t>(mu), "restricted_growth_claims_check");
    if (!(lam[a] > 0.0) || !(lam[b] > 0.0)) throw DomainError("restricted_growth_claims_check: lambda_a, lambda_b must be positive");
    if (!in_cone(lam.values(), mu + 2)) throw AdmissibilityError("restricted_growth_claims_check: lambda not in the cone");

    auto prod = [&](int m) {
        double p = 1.0;
        for (int i = 0; i < m; ++i) p *= lam[i];
        return p;
    };
    auto restricted = [&](int m) { return m < 0 ? 0.0 : sigma_restricted(m, lam, {a, b}); };
    const double ab = lam[a] * lam[b];

    GrowthClaims out;
    out.lower_ratio = sigma_d1(mu, lam, a) * lam[a] / prod(mu);
    out.lower_holds = out.lower_ratio >= 1.0 - kPositiveSlack;
    out.upper_ratio = {restricted(mu - 1) * ab / prod(mu + 1), restricted(mu) * ab / prod(mu + 2),
                       restricted(mu - 2) * ab / prod(mu)};
    out.calibrated = {binomial(n - 2, mu - 1), binomial(n - 2, mu), mu >= 2 ? binomial(n - 2, mu - 2) : 0.0};
    for (int c = 0; c < 3; ++c) out.upper_holds[c] = out.upper_ratio[c] <= out.calibrated[c] * (1.0 + kPositiveSlack);
    return out;
}

SuiteResult concavity_suite(int n, int k, int l, double delta, std::size_t samples, std::uint64_t seed, double rel) {
    const bool first = !(delta > 0.0);
    std::string name = (first ? "concavity" : "concavity-delta") + std::string(" n=") + std::to_string(n) +
                       " k=" + std::to_string(k) + " l=" + std::to_string(l);
    if (!first) name += " delta=" + fmt("%g", delta);
    return run_suite(name, samples, seed, [&](Rng& rng, std::size_t s, Tally& t) {
        const Spectrum lam = sample_cone(rng, static_cast<std::size_t>(n), k, 1.0);
        const std::vector<double> h = draw_slice(rng, static_cast<std::size_t>(n), s);
        const Gap g = first ? guan_inequality_17_check(k, l, lam, h) : guan_inequality_18_check(k, l, lam, h, delta);
        t.record(g, rel, [&] { return witness_of(lam, h, g, "sample " + std::to_string(s)); });
    });
}

SuiteResult shifted_suite(int n, int k, std::size_t samples, std::uint64_t seed, double rel) {
    const std::string name = "shifted n=" + std::to_string(n) + " k=" + std::to_string(k);
    const int level = std::min(k + 1, n);
    return run_suite(name, samples, seed, [&](Rng& rng, std::size_t s, Tally& t) {
        const Spectrum lam = sample_cone(rng, static_cast<std::size_t>(n), level, 1.0);
        const double sup_f = sigma(k, lam) * rng.uniform(1.0, 2.0);
        const double K0 = compute_shift(sup_f, n, k).K0;
        for (std::size_t i = 0; i < lam.size(); ++i)
            for (std::size_t j = 0; j < lam.size(); ++j) {
                if (i == j) continue;
                Gap g;
                try {
                    g = shifted_second_derivative_check(lam, K0, k, i, j);
                } catch (const DomainError&) {
                    g = {-1.0, 0.0};  // shift failed to make λ + K0 nonnegative
                }
                t.record(g, rel, [&] {
                    return witness_of(lam, {}, g,
                                      "sample " + std::to_string(s) + " K0=" + fmt("%.17g", K0) +
                                          " i=" + std::to_string(i) + " j=" + std::to_string(j));
                });
            }
    });
}

SuiteResult newton_suite(int n, std::size_t samples, std::uint64_t seed, double rel) {
    if (n < 4) throw DomainError("newton_suite: need n >= 4");
    const std::string name = "newton n=" + std::to_string(n);
    return run_suite(name, samples, seed, [&](Rng& rng, std::size_t s, Tally& t) {
        for (int mu = 2; mu <= n - 2; ++mu) {
            const Spectrum lam = sample_cone(rng, static_cast<std::size_t>(n), mu + 2, 1.0).sorted();
            for (std::size_t a = 0; a < static_cast<std::size_t>(mu); ++a)
                for (std::size_t b = a + 1; b < static_cast<std::size_t>(mu); ++b) {
                    const Gap g = newton_inequality_check(lam, mu, a, b);
                    t.record(g, rel, [&] {
                        return witness_of(lam, {}, g,
                                          "sample " + std::to_string(s) + " mu=" + std::to_string(mu) +
                                              " a=" + std::to_string(a) + " b=" + std::to_string(b));
                    });
                }
        }
    });
}

GrowthSuiteResult growth_claims_suite(int n, int mu, std::size_t samples, std::uint64_t seed) {
    if (mu < 2 || mu + 2 > n) throw DomainError("growth_claims_suite: need 2 <= mu <= n-2");
    struct Part {
        std::size_t lower_violations = 0;
        std::array<double, 3> max_ratio{};
        std::optional<Witness> witness;
    };
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<Part> parts(chunks);
    parallel_chunks(samples, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Rng rng(seed, c);
        Part& p = parts[c];
        for (std::size_t s = begin; s < end; ++s) {
            const Spectrum lam = draw_separated(rng, n, mu);
            for (std::size_t a = 0; a < static_cast<std::size_t>(mu); ++a)
                for (std::size_t b = a + 1; b < static_cast<std::size_t>(mu); ++b) {
                    const GrowthClaims g = restricted_growth_claims_check(lam, mu, a, b);
                    for (int q = 0; q < 3; ++q) p.max_ratio[q] = std::max(p.max_ratio[q], g.upper_ratio[q]);
                    if (!g.lower_holds) {
                        ++p.lower_violations;
                        if (!p.witness)
                            p.witness = witness_of(lam, {}, {g.lower_ratio - 1.0, 1.0},
                                                   "sample " + std::to_string(s) + " a=" + std::to_string(a) +
                                                       " b=" + std::to_string(b));
                    }
                }
        }
    });
    GrowthSuiteResult out;
    out.n = n;
    out.mu = mu;
    out.samples = samples;
    out.calibrated = {binomial(n - 2, mu - 1), binomial(n - 2, mu), mu >= 2 ? binomial(n - 2, mu - 2) : 0.0};
    for (auto& p : parts) {
        out.lower_violations += p.lower_violations;
        for (int q = 0; q < 3; ++q) out.max_ratio[q] = std::max(out.max_ratio[q], p.max_ratio[q]);
        if (!out.witness && p.witness) out.witness = std::move(p.witness);
    }
    return out;
}

QuantitySpec QuantitySpec::theorem2() { return {"theorem2", [](const ScalarField& u) { return theorem2_quantity(u); }}; }

QuantitySpec QuantitySpec::pogorelov(const PogorelovConfig& cfg) {
    cfg.validate();
    const std::string tag = "pogorelov(beta=" + fmt("%g", cfg.beta) + ",eps=" + fmt("%g", cfg.eps) +
                            ",a=" + fmt("%g", cfg.a) + ")";
    return {tag, [cfg](const ScalarField& u) { return pogorelov_sigma2_quantity(u, cfg); }};
}

std::string BoxProblem::describe() const {
    return "box [" + fmt("%g", low) + "," + fmt("%g", high) + "]^" + std::to_string(dim) + " k=" + std::to_string(k) +
           " f=" + rhs_name;
}

bool bounded_verdict(std::span<const double> maxima, double& slack, double rel, double growth) {
    slack = 0.0;
    if (maxima.size() < 2) return false;
    const double last = maxima[maxima.size() - 1], prev = maxima[maxima.size() - 2];
    const double denom = std::max(std::abs(last), std::abs(prev));
    slack = denom > 0.0 ? std::abs(last - prev) / denom : 0.0;
    return std::isfinite(last) && slack <= rel && last <= growth * maxima.front();
}

std::vector<EstimateReport> refinement_scan(const BoxProblem& problem, const std::vector<QuantitySpec>& quantities,
                                            const std::vector<int>& levels, const LevelHook& hook) {
    std::vector<EstimateReport> out(quantities.size());
    for (std::size_t q = 0; q < quantities.size(); ++q) {
        out[q].quantity = quantities[q].tag;
        out[q].domain = problem.describe();
    }
    for (int res : levels) {
        const GridDomain g = GridDomain::cube(problem.dim, problem.low, problem.high, res);
        LevelResult base;
        base.resolution = res;
        std::optional<SolveResult> solved;
        try {
            solved = solve_dirichlet(g, problem.rhs, problem.k, problem.tol, problem.max_iter);
            base.solved = true;
            base.iterations = solved->report.iterations;
            base.residual = solved->report.final_residual;
        } catch (const SolveError& e) {
            base.iterations = e.report().iterations;
            base.residual = e.report().final_residual;
        }
        for (std::size_t q = 0; q < quantities.size(); ++q) {
            LevelResult level = base;
            if (solved) {
                const NodeMax m = quantities[q].eval(solved->field);
                level.max = m.value;
                level.argmax = m.location;
            } else {
                out[q].partial = true;
            }
            out[q].levels.push_back(level);
        }
        if (solved && hook) hook(res, *solved);
    }
    for (auto& report : out) {
        std::vector<double> maxima;
        for (const auto& l : report.levels) maxima.push_back(l.max);
        report.bounded = bounded_verdict(maxima, report.slack) && !report.partial;
    }
    return out;
}

EstimateReport refinement_scan(const BoxProblem& problem, const QuantitySpec& quantity, const std::vector<int>& levels) {
    return refinement_scan(problem, std::vector<QuantitySpec>{quantity}, levels).front();
}

}  // namespace khess
