#include "khess/cone.hpp"
#include "khess/error.hpp"
#include "khess/estimates.hpp"
#include "khess/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>

using namespace khess;

namespace {

double norm2(const Point& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

// (|x|² − 1)/2 on the unit disc, pinned outside.
ScalarField paraboloid(int res) {
    const auto u = [](const Point& x) { return 0.5 * (norm2(x) - 1); };
    return ScalarField::masked(GridDomain::cube(2, -1.2, 1.2, res), [](const Point& x) { return norm2(x) < 1; }, u, u);
}

ScalarField box_field(int dim, int res, const std::function<double(const Point&)>& u) {
    return ScalarField::box(GridDomain::cube(dim, -1, 1, res), u, u);
}

}  // namespace

TEST_SUITE("estimates") {

TEST_CASE("Pogorelov quantity on the paraboloid") {
    const ScalarField u = paraboloid(49);
    const NodeMax m = pogorelov_sigma2_quantity(u, {1.0, 0.0, 0.0, 2, 0.0});
    CHECK(m.value == doctest::Approx(0.5));
    CHECK(norm2(m.location) < 1e-20);
    CHECK(pogorelov_sigma2_quantity(u, {0.0, 0.0, 0.0, 2, 0.0}).value == doctest::Approx(1.0));
    // exponential weights only increase the value
    CHECK(pogorelov_sigma2_quantity(u, {1.0, 0.05, 0.5, 2, 0.0}).value >= 0.5);
    CHECK_THROWS_AS(PogorelovConfig({-1.0, 0.0, 0.0, 2, 0.0}).validate(), DomainError);
    CHECK_THROWS_AS(PogorelovConfig({1.0, 0.0, 0.0, 1, 0.0}).validate(), DomainError);
}

TEST_CASE("weighted Laplacian quantity") {
    for (int res : {25, 49}) {
        const ScalarField u = paraboloid(res);
        const NodeMax m = theorem2_quantity(u);
        CHECK(m.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(norm2(m.location) < 1e-20);
    }
    const ScalarField u = paraboloid(33);
    CHECK(theorem2_quantity(u.scaled(3.0)).value == doctest::Approx(9.0 * theorem2_quantity(u).value).epsilon(1e-12));
    const ScalarField positive = box_field(2, 9, [](const Point& x) { return 1 + norm2(x); });
    CHECK_THROWS_AS(theorem2_quantity(positive), DomainError);
}

TEST_CASE("power sums of the shifted spectrum") {
    const NodalValues a = pm_quantity(box_field(3, 7, [](const Point& x) { return 0.5 * norm2(x); }), 0.0, 2);
    for (double v : a.values) CHECK(v == doctest::Approx(3.0));
    const NodalValues b = pm_quantity(box_field(2, 7, [](const Point& x) { return 0.5 * x[0] * x[0]; }), 1.0, 3);
    for (double v : b.values) CHECK(v == doctest::Approx(9.0));

    const ScalarField w = box_field(2, 11, [](const Point& x) { return x[0] * x[0] + 0.3 * x[0] * x[1] + std::exp(x[1]); });
    const double K0 = 2.0;
    const NodalValues c = pm_quantity(w, K0, 4);
    for (std::size_t j = 0; j < c.nodes.size(); ++j) {
        const SymMatrix h = discrete_hessian(w, c.nodes[j]);
        const double kappa1 = 0.5 * (h(0, 0) + h(1, 1)) +
                              std::sqrt(0.25 * std::pow(h(0, 0) - h(1, 1), 2) + h(0, 1) * h(0, 1)) + K0;
        CHECK(c.values[j] >= std::pow(kappa1, 4) * (1 - 1e-12));
        CHECK(c.values[j] <= 2 * std::pow(kappa1, 4) * (1 + 1e-12));
    }
    CHECK_THROWS_AS(pm_quantity(box_field(2, 7, [](const Point& x) { return -0.5 * x[0] * x[0]; }), 0.0, 2),
                    AdmissibilityError);
}

TEST_CASE("shift field check detects a wrong bound") {
    // Hessian diag(10, 10, −4) lies in Γ_2 with σ_1 = 16, far above the claimed sup f = 1.
    const ScalarField u = box_field(3, 7, [](const Point& x) { return 5 * x[0] * x[0] + 5 * x[1] * x[1] - 2 * x[2] * x[2]; });
    const ShiftFieldCheck bad = shift_field_check(u, 1, 1.0);
    CHECK_FALSE(bad.passed);
    CHECK(bad.min_eigenvalue == doctest::Approx(-4.0));
    CHECK(shift_field_check(u, 1, 16.0).passed);
    // k = 2 needs Γ_3, so the same field is skipped
    const ShiftFieldCheck skipped = shift_field_check(u, 2, 1.0);
    CHECK(skipped.checked == 0);
    CHECK(skipped.passed);
}

TEST_CASE("inequality checks on fixed spectra") {
    const Spectrum ones{1, 1, 1};
    const std::vector<double> zero(3, 0.0), one(3, 1.0), e1{1, 0, 0};
    CHECK(guan_inequality_17_check(2, 1, ones, zero).gap == doctest::Approx(0.0).scale(1));
    CHECK(guan_inequality_17_check(2, 1, ones, one).gap >= 0.0);
    CHECK(guan_inequality_18_check(2, 1, ones, zero, 0.1).gap == doctest::Approx(0.0).scale(1));
    CHECK(guan_inequality_18_check(2, 1, ones, e1, 0.1).gap >= 0.0);

    const Gap s = shifted_second_derivative_check(ones, 0.0, 2, 0, 1);
    CHECK(s.gap == doctest::Approx(1.0));
    // linear in K0 with slope σ_{k-2}(λ|ij)
    CHECK(shifted_second_derivative_check(ones, 5.0, 2, 0, 1).gap == doctest::Approx(6.0));

    CHECK(newton_inequality_check(Spectrum{1, 1, 1, 1}, 2, 0, 1).gap == doctest::Approx(3.0));

    const GrowthClaims g = restricted_growth_claims_check(Spectrum{1, 1, 1, 1}, 2, 0, 1);
    CHECK(g.lower_holds);
    const GrowthClaims h = restricted_growth_claims_check(Spectrum{0.5, 3, 1, 2}, 2, 0, 1);
    CHECK(h.lower_ratio == doctest::Approx(3.5 * 3 / 6));
    CHECK(h.lower_holds);
}

TEST_CASE("randomized suites") {
    for (auto [n, k, l] : {std::tuple{3, 2, 1}, {4, 3, 1}, {4, 3, 2}, {5, 3, 0}}) {
        CHECK(concavity_suite(n, k, l, 0.0, 1000, 1).violations == 0);
        CHECK(concavity_suite(n, k, l, 0.01, 1000, 2).violations == 0);
    }
    for (int n = 2; n <= 5; ++n)
        for (int k = 2; k <= n; ++k) CHECK(shifted_suite(n, k, 500, 3).violations == 0);
    CHECK(newton_suite(5, 1000, 4).violations == 0);
    const GrowthSuiteResult g = growth_claims_suite(5, 2, 1000, 5);
    CHECK(g.lower_violations == 0);
    CHECK(g.samples == 1000);
}

TEST_CASE("suites are reproducible across thread counts") {
    setenv("KHESS_THREADS", "1", 1);
    const SuiteResult a = concavity_suite(4, 3, 1, 0.1, 1500, 77);
    setenv("KHESS_THREADS", "3", 1);
    const SuiteResult b = concavity_suite(4, 3, 1, 0.1, 1500, 77);
    unsetenv("KHESS_THREADS");
    CHECK(a.checks == b.checks);
    CHECK(a.worst == b.worst);
    CHECK(concavity_suite(4, 3, 1, 0.1, 1500, 78).worst != a.worst);
}

TEST_CASE("bounded verdict") {
    double slack = 0.0;
    const double steady[] = {1.0, 1.02, 1.03, 1.035};
    CHECK(bounded_verdict(steady, slack));
    CHECK(slack == doctest::Approx(0.005 / 1.035).epsilon(1e-6));
    const double jump[] = {1.0, 1.0, 1.0, 1.2};
    CHECK_FALSE(bounded_verdict(jump, slack));
    const double creep[] = {1.0, 1.04, 1.08, 1.12};
    CHECK_FALSE(bounded_verdict(creep, slack));
}

TEST_CASE("refinement scan bookkeeping") {
    BoxProblem p;
    p.dim = 2;
    p.k = 2;
    int calls = 0;
    const auto reports = refinement_scan(p, {QuantitySpec::theorem2(), QuantitySpec::pogorelov({2, 0.05, 0.5, 2, 0})},
                                         {17, 33}, [&](int, const SolveResult& r) {
                                             ++calls;
                                             CHECK(r.report.converged);
                                             CHECK(shift_field_check(r.field, 2, 1.0).passed);
                                         });
    CHECK(calls == 2);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].quantity == "theorem2");
    CHECK(reports[1].quantity == "pogorelov(beta=2,eps=0.05,a=0.5)");
    for (const auto& r : reports) {
        REQUIRE(r.levels.size() == 2);
        CHECK(r.levels[1].resolution == 33);
        CHECK(r.levels[1].max > 0.0);
        CHECK_FALSE(r.partial);
    }

    p.max_iter = 1;
    p.tol = 1e-14;
    const EstimateReport failed = refinement_scan(p, QuantitySpec::theorem2(), {17});
    CHECK(failed.partial);
    CHECK_FALSE(failed.levels[0].solved);
    CHECK_FALSE(failed.bounded);
}

}
