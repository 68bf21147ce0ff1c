#pragma once

#include "khess/grid.hpp"
#include "khess/solver.hpp"
#include "khess/symfun.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace khess {

struct PogorelovConfig {
    double beta = 1.0;
    double eps = 0.0;
    double a = 0.0;
    int m = 2;
    double N = 0.0;

    void validate() const;
};

/// Grid maximum of a nodal quantity over the active nodes.
struct NodeMax {
    double value = 0.0;
    std::size_t node = 0;
    Point location{};
};

struct NodalValues {
    std::vector<std::size_t> nodes;
    std::vector<double> values;
};

/// max (−u)^β exp(ε/2|Du|² + a/2|x|²) λ_max(D²u). Throws DomainError when
/// some active node has u > 1e-12.
NodeMax pogorelov_sigma2_quantity(const ScalarField& u, const PogorelovConfig& cfg);

/// max (−u)·tr D²u.
NodeMax theorem2_quantity(const ScalarField& u);

/// P_m = Σ_j (λ_j + K0)^m per active node. Throws AdmissibilityError when a
/// shifted eigenvalue is below −1e-10.
NodalValues pm_quantity(const ScalarField& u, double K0, int m);

/// Smallest eigenvalue against −K0 on active nodes whose spectrum lies in
/// Γ_{min(k+1, n)}.
struct ShiftFieldCheck {
    double K0 = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    double min_eigenvalue = 0.0;
    Point witness{};
    bool passed = true;
};

ShiftFieldCheck shift_field_check(const ScalarField& u, int k, double sup_f, double tol = 1e-8);

/// w ≤ u ≤ 0 with w the barrier quadratic of the same data.
struct BracketCheck {
    double above_zero = 0.0;      // max(u) over active nodes, clipped at 0
    double below_barrier = 0.0;   // max(w − u), clipped at 0
    bool passed(double slack = 1e-9) const { return above_zero <= slack && below_barrier <= slack; }
};

BracketCheck bracketing_check(const ScalarField& u, const RhsSpec& rhs, int k);

/// Signed gap of an inequality LHS ≥ RHS and the magnitude of its terms.
struct Gap {
    double gap = 0.0;
    double scale = 0.0;
    bool holds(double rel) const { return gap >= -rel * scale; }
};

Gap guan_inequality_17_check(int k, int l, const Spectrum& lam, std::span<const double> slice);
Gap guan_inequality_18_check(int k, int l, const Spectrum& lam, std::span<const double> slice, double delta);

/// κ_j σ_k^{jj,ii} + σ_k^{jj} − σ_k^{ii} with κ = λ + K0 (i, j distinct, 0-based).
Gap shifted_second_derivative_check(const Spectrum& lam, double K0, int k, std::size_t i, std::size_t j);

/// σ_{μ−1}(λ|ab)² − σ_μ(λ|ab)σ_{μ−2}(λ|ab); `scale` is already quadratic.
Gap newton_inequality_check(const Spectrum& lam, int mu, std::size_t a, std::size_t b);

/// Lower bound σ_μ^{aa} ≥ λ_1⋯λ_μ/λ_a and the three upper bounds on σ_{μ−1},
/// σ_μ, σ_{μ−2} of (λ|ab), each as observed ratio against the calibrated C
/// (the ratio at λ = (1,…,1)). Indices refer to the non-increasing order.
struct GrowthClaims {
    double lower_ratio = 0.0;  // σ_μ^{aa}·λ_a / (λ_1⋯λ_μ)
    bool lower_holds = false;
    std::array<double, 3> upper_ratio{};
    std::array<double, 3> calibrated{};
    std::array<bool, 3> upper_holds{};
};

GrowthClaims restricted_growth_claims_check(const Spectrum& lam, int mu, std::size_t a, std::size_t b);

struct Witness {
    std::vector<double> lam;
    std::vector<double> slice;
    double gap = 0.0;
    double scale = 0.0;
    std::string detail;
};

struct SuiteResult {
    std::string name;
    std::size_t samples = 0;
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst = 0.0;  // min gap/scale over checks
    std::optional<Witness> witness;

    bool passed() const { return violations == 0; }
};

/// Concavity suites: λ ∈ Γ_k from the mixed sampler, slices alternating
/// uniform [−1,1]^n and heavy-tailed. `delta` ≤ 0 selects the first form.
SuiteResult concavity_suite(int n, int k, int l, double delta, std::size_t samples, std::uint64_t seed,
                       double rel = 1e-10);

/// λ ∈ Γ_{min(k+1,n)}, sup f drawn above σ_k(λ), K0 from the shift formula; every
/// ordered pair (i, j).
SuiteResult shifted_suite(int n, int k, std::size_t samples, std::uint64_t seed, double rel = 1e-12);

/// Every μ with 2 ≤ μ ≤ n−2 and pair a < b ≤ μ on λ ∈ Γ_{μ+2}.
SuiteResult newton_suite(int n, std::size_t samples, std::uint64_t seed, double rel = 1e-12);

struct GrowthSuiteResult {
    int n = 0;
    int mu = 0;
    std::size_t samples = 0;
    std::size_t lower_violations = 0;
    std::array<double, 3> max_ratio{};
    std::array<double, 3> calibrated{};
    std::optional<Witness> witness;
};

/// Sorted λ ∈ Γ_{μ+2} with λ_{μ+1}/λ_1 ≤ 0.1; all pairs a < b ≤ μ (2 ≤ μ ≤ n−2).
GrowthSuiteResult growth_claims_suite(int n, int mu, std::size_t samples, std::uint64_t seed);

struct QuantitySpec {
    std::string tag;
    std::function<NodeMax(const ScalarField&)> eval;

    static QuantitySpec theorem2();
    static QuantitySpec pogorelov(const PogorelovConfig& cfg);
};

/// σ_k(D²u) = f on a cube with zero boundary data.
struct BoxProblem {
    int dim = 2;
    int k = 2;
    double low = 0.0;
    double high = 1.0;
    RhsSpec rhs = RhsSpec::constant(1.0);
    std::string rhs_name = "1";
    double tol = 1e-8;
    int max_iter = 100;

    std::string describe() const;
};

struct LevelResult {
    int resolution = 0;
    bool solved = false;
    double max = 0.0;
    Point argmax{};
    int iterations = 0;
    double residual = 0.0;
};

struct EstimateReport {
    std::string quantity;
    std::string domain;
    std::vector<LevelResult> levels;
    bool bounded = false;
    double slack = 0.0;  // relative change over the last two levels
    bool partial = false;
};

/// Last two levels within `rel` and last ≤ growth·first.
bool bounded_verdict(std::span<const double> maxima, double& slack, double rel = 0.05, double growth = 1.1);

using LevelHook = std::function<void(int resolution, const SolveResult&)>;

/// Solves once per level and evaluates every quantity on the same field.
std::vector<EstimateReport> refinement_scan(const BoxProblem& problem, const std::vector<QuantitySpec>& quantities,
                                            const std::vector<int>& levels, const LevelHook& hook = {});

EstimateReport refinement_scan(const BoxProblem& problem, const QuantitySpec& quantity,
                               const std::vector<int>& levels);

}  // namespace khess
