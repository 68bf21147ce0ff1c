#include "khess/error.hpp"
#include "khess/estimates.hpp"
#include "khess/radial.hpp"
#include "khess/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace khess;

namespace {

double norm2(const Point& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

double max_error(const ScalarField& u, const std::function<double(const Point&)>& exact) {
    double e = 0.0;
    for (std::size_t i : u.active_nodes()) e = std::max(e, std::abs(u[i] - exact(u.domain().position(i))));
    return e;
}

// Box with boundary data g and a zero interior start, so the solver has to find its own admissible start.
ScalarField quadratic_data(int dim, int res, double c) {
    const auto g = [c](const Point& x) { return 0.5 * c * norm2(x); };
    return ScalarField::box(GridDomain::cube(dim, -1, 1, res), [](const Point&) { return 0.0; }, g);
}

double disc_error(int res, int k, const std::function<double(double)>& f, double sup_f) {
    const RadialProfile prof = solve_radial(1.0, 2, k, f, 256);
    const GridDomain g = GridDomain::cube(2, -1.25, 1.25, res);
    const auto r = [](const Point& x) { return std::sqrt(norm2(x)); };
    const ScalarField start = ScalarField::masked(
        g, [&](const Point& x) { return r(x) < 1.0; }, [](const Point&) { return 0.0; },
        [&](const Point& x) { return prof(r(x)); });
    SolveOptions o;
    o.k = k;
    const SolveResult res_ = solve(start, RhsSpec::position([&](const Point& x) { return f(r(x)); }, sup_f), o);
    return max_error(res_.field, [&](const Point& x) { return prof(r(x)); });
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("barrier coefficients") {
    const GridDomain g2 = GridDomain::cube(2, 0, 1, 9);
    const GridDomain g3 = GridDomain::cube(3, 0, 1, 9);
    const auto zero = [](const Point&) { return 0.0; };
    const QuadraticBarrier w2 = subsolution_quadratic(ScalarField::box(g2, zero, zero), RhsSpec::constant(1), 2);
    CHECK(w2.a == doctest::Approx(1.1));
    const QuadraticBarrier w3 = subsolution_quadratic(ScalarField::box(g3, zero, zero), RhsSpec::constant(1), 2);
    CHECK(w3.a == doctest::Approx(1.1 / std::sqrt(3.0)));
    const ScalarField start = initial_guess(g2, RhsSpec::constant(1), 2);
    for (std::size_t i = 0; i < g2.node_count(); ++i) CHECK(start[i] <= 1e-15);
    CHECK_THROWS_AS(RhsSpec::constant(0.0), DomainError);
    CHECK_THROWS_AS(subsolution_quadratic(ScalarField::box(g2, zero, zero), RhsSpec::constant(1), 3), DomainError);
}

TEST_CASE("power product start is admissible") {
    for (auto [dim, k] : {std::pair{2, 2}, {2, 1}, {3, 2}, {3, 3}}) {
        const GridDomain g = GridDomain::cube(dim, 0, 1, 17);
        const ScalarField s = power_product_start(g, RhsSpec::constant(1), k);
        CHECK(min_cone_margin(s, k) > 0.0);
        for (std::size_t i = 0; i < g.node_count(); ++i)
            if (g.on_box_boundary(i)) CHECK(s[i] == 0.0);
    }
}

TEST_CASE("quadratic solutions are reproduced") {
    SolveOptions o;
    o.k = 2;
    const SolveResult ma = solve(quadratic_data(2, 33, 1.0), RhsSpec::constant(1), o);
    CHECK(max_error(ma.field, [](const Point& x) { return 0.5 * norm2(x); }) <= 1e-9);
    CHECK(ma.report.converged);

    const double c = 1 / std::sqrt(3.0);
    const SolveResult s2 = solve(quadratic_data(3, 17, c), RhsSpec::constant(1), o);
    CHECK(max_error(s2.field, [c](const Point& x) { return 0.5 * c * norm2(x); }) <= 1e-9);

    o.k = 3;
    const SolveResult s3 = solve(quadratic_data(3, 17, 1.0), RhsSpec::constant(1), o);
    CHECK(max_error(s3.field, [](const Point& x) { return 0.5 * norm2(x); }) <= 1e-9);
}

TEST_CASE("iterates stay admissible and the solution is bracketed") {
    const GridDomain g = GridDomain::cube(2, 0, 1, 33);
    const RhsSpec rhs = RhsSpec::position(
        [](const Point& x) { return 1 + 0.5 * std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]); },
        1.5);
    const SolveResult r = solve_dirichlet(g, rhs, 2, 1e-10, 100);
    for (double m : r.report.iterate_cone_margin) CHECK(m >= -1e-10);
    CHECK(r.report.admissibility_violations == 0);
    CHECK(r.report.final_residual <= 1e-10);
    double worst = 0.0;
    for (double v : residual(r.field, rhs, 2)) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-10);
    CHECK(bracketing_check(r.field, rhs, 2).passed());
    // symmetric data, symmetric solution
    CHECK(r.field[g.index({10, 20, 0})] == doctest::Approx(r.field[g.index({20, 10, 0})]).epsilon(1e-9));
}

TEST_CASE("solves are deterministic") {
    const GridDomain g = GridDomain::cube(3, 0, 1, 13);
    const SolveResult a = solve_dirichlet(g, RhsSpec::constant(1), 2, 1e-10, 100);
    const SolveResult b = solve_dirichlet(g, RhsSpec::constant(1), 2, 1e-10, 100);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(a.field[i] == b.field[i]);
}

TEST_CASE("gradient and value dependent right-hand sides") {
    // u = |x|²/2 solves det D²u = 1 + |Du|² − |x|², and det D²u = exp(u − |x|²/2)
    const RhsSpec grad_fd = RhsSpec::full(
        [](const Point& x, double, const Point& p) { return 1 + p[0] * p[0] + p[1] * p[1] - norm2(x); }, 3.0);
    const RhsSpec grad_exact = RhsSpec::full(
        [](const Point& x, double, const Point& p) { return 1 + p[0] * p[0] + p[1] * p[1] - norm2(x); }, 3.0,
        [](const Point&, double, const Point&) { return 0.0; },
        [](const Point&, double, const Point& p) { return Point{2 * p[0], 2 * p[1], 0}; });
    const RhsSpec value_fd =
        RhsSpec::full([](const Point& x, double u, const Point&) { return std::exp(u - 0.5 * norm2(x)); }, 3.0);
    SolveOptions o;
    o.k = 2;
    for (const RhsSpec* rhs : {&grad_fd, &grad_exact, &value_fd}) {
        const SolveResult r = solve(quadratic_data(2, 21, 1.0), *rhs, o);
        CHECK(max_error(r.field, [](const Point& x) { return 0.5 * norm2(x); }) <= 1e-9);
    }
}

TEST_CASE("Poisson converges at second order") {
    // k = 1 with u = −sin(πx)sin(πy)/(2π²), f = sin(πx)sin(πy)
    const double pi = std::numbers::pi;
    const auto exact = [pi](const Point& x) { return -std::sin(pi * x[0]) * std::sin(pi * x[1]) / (2 * pi * pi); };
    const RhsSpec rhs = RhsSpec::position(
        [pi](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); }, 1.0);
    std::vector<double> err;
    for (int res : {17, 33, 65}) err.push_back(max_error(solve_dirichlet(GridDomain::cube(2, 0, 1, res), rhs, 1, 1e-12, 50).field, exact));
    CHECK(std::log2(err[0] / err[1]) >= 1.9);
    CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

TEST_CASE("masked disc against the radial profile") {
    for (int res : {33, 65}) {
        const double h = 2.5 / (res - 1);
        CHECK(disc_error(res, 2, [](double) { return 1.0; }, 1.0) <= 1e-9);
        CHECK(disc_error(res, 2, [](double r) { return 1 + r * r; }, 5.0) <= 5 * h * h);
        CHECK(disc_error(res, 1, [](double r) { return 1 + r * r; }, 5.0) <= 5 * h * h);
    }
}

TEST_CASE("failures carry the report") {
    SolveOptions o;
    o.k = 2;
    o.max_iter = 1;
    o.tol = 1e-14;
    const GridDomain g = GridDomain::cube(2, 0, 1, 17);
    try {
        solve(initial_guess(g, RhsSpec::constant(1), 2), RhsSpec::constant(1), o);
        FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
        CHECK(e.report().iterations == 1);
        CHECK_FALSE(e.report().converged);
        CHECK(e.report().residual_history.size() == 2);
    }
}

}
