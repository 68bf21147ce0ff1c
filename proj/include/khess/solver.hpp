#pragma once

#include "khess/grid.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace khess {

/// Right-hand side f(x, u, ∇u) > 0 with a declared upper bound.
struct RhsSpec {
    enum class Kind { constant, position, full };

    using Value = std::function<double(const Point& x, double u, const Point& grad)>;
    using DerivU = std::function<double(const Point& x, double u, const Point& grad)>;
    using DerivP = std::function<Point(const Point& x, double u, const Point& grad)>;

    Kind kind = Kind::constant;
    Value value;
    DerivU du;  // optional; finite differences when empty
    DerivP dp;  // optional; finite differences when empty
    double sup_f = 1.0;

    static RhsSpec constant(double c);
    static RhsSpec position(std::function<double(const Point&)> f, double sup_f);
    static RhsSpec full(Value f, double sup_f, DerivU du = {}, DerivP dp = {});

    /// Evaluates f; throws DomainError when the value is not positive.
    double operator()(const Point& x, double u, const Point& grad) const;
};

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;
    int admissibility_violations = 0;
    std::vector<double> damping_history;
    std::vector<double> residual_history;
    // Smallest normalised cone margin over active nodes, per accepted iterate
    // (index 0 is the initial guess).
    std::vector<double> iterate_cone_margin;
    int continuation_stages = 0;
    bool converged = false;
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, SolveReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

class NonConvergence : public SolveError {
public:
    using SolveError::SolveError;
};

class ConeViolation : public SolveError {
public:
    using SolveError::SolveError;
};

struct SolveOptions {
    int k = 2;
    double tol = 1e-10;
    int max_iter = 100;
    double cone_tol = 1e-10;
    int max_halvings = 30;
    enum class Linear { automatic, direct, iterative } linear = Linear::automatic;
    double iterative_tol = 1e-12;
};

struct SolveResult {
    ScalarField field;
    SolveReport report;
};

/// Convex quadratic w(x) = (a/2)|x − c|² − b with σ_k(D²w) ≥ sup f.
struct QuadraticBarrier {
    double a = 0.0;
    double b = 0.0;
    Point center{};
    int dim = 2;

    double operator()(const Point& x) const;
};

/// a = 1.1·(sup_f / C(n,k))^{1/k}; b makes w ≤ min(0, boundary data) on every node.
QuadraticBarrier subsolution_quadratic(const ScalarField& boundary, const RhsSpec& rhs, int k);

/// Boundary data of `boundary` with the barrier quadratic on the active nodes.
ScalarField initial_guess(const ScalarField& boundary, const RhsSpec& rhs, int k);
ScalarField initial_guess(const GridDomain& domain, const RhsSpec& rhs, int k);

/// −A·Π_a ((x_a − low_a)(high_a − x_a))^{0.8/n}: zero on the box boundary and
/// strictly convex inside (the exponent is below 1/n), with A matching σ_k at the
/// centre to sup f. Admissible start for zero Dirichlet data on a box.
ScalarField power_product_start(const GridDomain& domain, const RhsSpec& rhs, int k);

/// Nodal residual σ_k(D²_h u) − f(x, u, ∇_h u) on the active nodes.
std::vector<double> residual(const ScalarField& u, const RhsSpec& rhs, int k);

/// Smallest normalised margin min_m σ_m(λ)/max(1,|λ|_∞)^m over active nodes.
double min_cone_margin(const ScalarField& u, int k);

/// Damped Newton from `start`; pinned values of `start` are the Dirichlet data.
/// A start outside the closed cone is replaced by an admissible field (the power
/// product for zero data on a box, the barrier quadratic otherwise) and the
/// boundary data are reached by continuation.
SolveResult solve(const ScalarField& start, const RhsSpec& rhs, const SolveOptions& opts);

/// σ_k(D²u) = f in the box, u = 0 on the boundary.
SolveResult solve_dirichlet(const GridDomain& domain, const RhsSpec& rhs, int k, double tol, int max_iter);

}  // namespace khess
