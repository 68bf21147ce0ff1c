#include "khess/error.hpp"
#include "khess/rigidity.hpp"

#include <doctest.h>

#include <cmath>

using namespace khess;

namespace {

double norm(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

}  // namespace

TEST_SUITE("rigidity") {

TEST_CASE("rescaling") {
    const EntireCandidate q = EntireCandidate::quadratic(2, 2);
    const EntireCandidate p = EntireCandidate::perturbed_quadratic(2, 2, 0.1);
    const Point y{0.3, -0.7, 0};
    const double base = 0.5 * (0.09 + 0.49) - 1;
    for (double R : {1.0, 3.0, 17.0}) {
        CHECK(rescale(q, R)(y) == doctest::Approx(base));
        CHECK(rescale(p, R)(y) - base == doctest::Approx(0.1 * std::sin(R * 0.3) / (R * R)).epsilon(1e-9).scale(1e-3));
    }
    CHECK(rescale(q, 1.0)(y) == doctest::Approx(q.u(y) - 1));
    CHECK_THROWS_AS(rescale(q, 0.0), DomainError);
}

TEST_CASE("sublevel domains") {
    const EntireCandidate q = EntireCandidate::quadratic(2, 2);
    const SublevelMask outer = sublevel_domain(q, 5.0, 1.0, 201);
    const SublevelMask inner = sublevel_domain(q, 5.0, 0.5, 201);
    const double h = outer.domain.spacing();
    CHECK(outer.radius <= std::sqrt(2.0));
    CHECK(outer.radius >= std::sqrt(2.0) - h);
    CHECK(inner.radius <= 1.0);
    CHECK(inner.radius >= 1.0 - h);

    const EntireCandidate p = EntireCandidate::perturbed_quadratic(2, 2, 0.1);
    for (double R : {2.0, 8.0}) {
        const SublevelMask m = sublevel_domain(p, R, 1.0, 201);
        const double hm = m.domain.spacing();
        CHECK(m.radius <= p.bounding_radius() + hm);
        for (std::size_t i = 0; i < m.domain.node_count(); ++i) {
            const Point x = m.domain.position(i);
            const bool ball = 0.5 * norm(x) * norm(x) <= 1.0;
            // |v − v_quadratic| ≤ 0.1/R² moves the boundary by at most that much over |∇v| ≥ √2 − …
            if (ball != (m.inside[i] != 0)) CHECK(std::abs(norm(x) - std::sqrt(2.0)) <= 0.1 / (R * R) + hm);
        }
    }
    CHECK_THROWS_AS(sublevel_domain(q, 1.0, 0.0, 51), DomainError);
}

TEST_CASE("growth certificates") {
    const double radii[] = {0.5, 1, 2, 4, 8, 16, 32};
    const EntireCandidate q = EntireCandidate::quadratic(2, 2);
    CHECK(growth_certificate(q, 0.25, 0.0, radii, 1).holds);
    const EntireCandidate p = EntireCandidate::perturbed_quadratic(2, 2, 0.1);
    CHECK(growth_certificate(p, 0.25, 1.0, radii, 1).holds);
    EntireCandidate cone;
    cone.dim = 2;
    cone.u = [](const Point& x) { return norm(x); };
    const GrowthCertificate c = growth_certificate(cone, 0.1, 0.0, radii, 1);
    CHECK_FALSE(c.holds);
    REQUIRE(c.witness.has_value());
    CHECK(norm(*c.witness) > 9.0);
    cone.c = 0.1;
    cone.b = 0.0;
    RigidityOptions o;
    o.resolution = 33;
    CHECK_THROWS_AS(rigidity_experiment(cone, o), GrowthViolation);
}

TEST_CASE("log-log slope") {
    const double x[] = {2, 4, 8, 16};
    const double y[] = {3.0 / 4, 3.0 / 16, 3.0 / 64, 3.0 / 256};
    CHECK(loglog_slope(x, y) == doctest::Approx(-2.0));
    CHECK(std::isnan(loglog_slope(std::span<const double>(x, 1), std::span<const double>(y, 1))));
}

TEST_CASE("small experiments") {
    RigidityOptions o;
    o.resolution = 49;
    o.schedule = {2, 4};
    const RigidityTrace flat = rigidity_experiment(EntireCandidate::quadratic(2, 2), o);
    REQUIRE(flat.levels.size() == 2);
    for (const auto& l : flat.levels) {
        CHECK(l.solved);
        CHECK(l.osc <= 1e-6);
        CHECK(l.sup_lap == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(l.max_inner_v <= -0.5 + 1e-9);
    }
    CHECK(std::isnan(flat.exponent));

    o.schedule = {2, 4, 8};
    const RigidityTrace a = rigidity_experiment(EntireCandidate::perturbed_quadratic(2, 2), o);
    const RigidityTrace b = rigidity_experiment(EntireCandidate::perturbed_quadratic(2, 2), o);
    CHECK(a.exponent == b.exponent);
    CHECK(a.exponent < -1.0);
    CHECK(a.levels[0].osc > a.levels[2].osc);

    RigidityOptions bad = o;
    bad.schedule = {4, 2};
    CHECK_THROWS_AS(rigidity_experiment(EntireCandidate::quadratic(2, 2), bad), DomainError);
}

}
