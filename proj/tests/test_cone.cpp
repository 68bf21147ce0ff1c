#include "khess/cone.hpp"
#include "khess/error.hpp"
#include "khess/sampling.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace khess;

TEST_SUITE("cone") {

TEST_CASE("classification examples") {
    CHECK(classify(Spectrum{1, 1, 1}).max_level == 3);
    CHECK(classify(Spectrum{1, 1, -0.5}).max_level == 1);
    CHECK(classify(Spectrum{-1, -1, -1}).max_level == 0);
    const ConeVerdict v = classify(Spectrum{3, 2, 1});
    REQUIRE(v.margins.size() == 3);
    CHECK(v.margins[1] == 11.0);
    CHECK(v.in_cone(3));
    const double edge[] = {1, 1, -0.5};
    CHECK(in_closed_cone(edge, 2));
    CHECK_FALSE(in_cone(edge, 2));
}

TEST_CASE("shift constant") {
    CHECK(compute_shift(1, 3, 2).K0 == doctest::Approx(3));
    CHECK(compute_shift(1, 2, 2).K0 == doctest::Approx(2));
    CHECK(compute_shift(16, 2, 2).K0 == doctest::Approx(8));
    CHECK_THROWS_AS(compute_shift(0, 2, 2), DomainError);
    CHECK_THROWS_AS(compute_shift(1, 2, 3), DomainError);
}

TEST_CASE("shifting spectra") {
    const Spectrum s = shift_spectrum(Spectrum{1, 0, -1}, 1);
    CHECK(s[0] == 2);
    CHECK(s[1] == 1);
    CHECK(s[2] == 0);
    const Spectrum lam{0.3, -1.2, 4};
    const Spectrum a = shift_spectrum(shift_spectrum(lam, 0.7), 1.1);
    const Spectrum b = shift_spectrum(lam, 1.8);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]));
    CHECK(shift_spectrum(lam, 0)[1] == lam[1]);
}

TEST_CASE("tail positivity and product bound") {
    CHECK(tail_positivity_check(Spectrum{3, 2, 1}, 2));
    CHECK(tail_positivity_check(Spectrum{5, 1, -0.5}, 2));
    CHECK(tail_positivity_check(Spectrum{1, 1, 1}, 3));
    CHECK(product_bound_check(Spectrum{1, 1, 1}, 2));
    CHECK(product_bound_check(Spectrum{3, 2, 1}, 2));

    Rng rng(31, 0);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = 2 + trial % 5;
        const int k = 1 + trial % static_cast<int>(n - 1);
        const Spectrum lam = sample_cone_rejection(rng, n, k + 1, 3.0);
        CHECK(tail_positivity_check(lam, k));
        CHECK(product_bound_check(lam, k));
    }
}

TEST_CASE("classification agrees with subset sums") {
    Rng rng(32, 0);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = 2 + trial % 5;
        const std::vector<double> v = uniform_box(rng, n, 1.0);
        int level = 0;
        while (level < static_cast<int>(n) && oracle::sigma_subsets(level + 1, v) > 0) ++level;
        CHECK(classify(Spectrum(v)).max_level == level);
    }
}

}
