#include "khess/sampling.hpp"
#include "khess/symeig.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace khess;

namespace {

SymMatrix from_eigen(const Eigen::MatrixXd& m) {
    SymMatrix s(m.rows());
    for (long i = 0; i < m.rows(); ++i)
        for (long j = i; j < m.cols(); ++j) s.set(i, j, m(i, j));
    return s;
}

// Q diag(d) Qᵀ with a random orthogonal Q.
Eigen::MatrixXd with_spectrum(Rng& rng, const std::vector<double>& d) {
    const long n = static_cast<long>(d.size());
    Eigen::MatrixXd g(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) g(i, j) = rng.normal();
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd dv(n);
    for (long i = 0; i < n; ++i) dv(i) = d[i];
    return q * dv.asDiagonal() * q.transpose();
}

void check_close(const std::vector<double>& got, const std::vector<double>& ref, double tol) {
    REQUIRE(got.size() == ref.size());
    double scale = 1.0;
    for (double r : ref) scale = std::max(scale, std::abs(r));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - ref[i]) <= tol * scale);
}

}  // namespace

TEST_SUITE("symeig") {

TEST_CASE("closed forms on simple matrices") {
    const auto e2 = eigenvalues_sym2(2, 1, 2);
    CHECK(e2[0] == doctest::Approx(3));
    CHECK(e2[1] == doctest::Approx(1));
    const auto e3 = eigenvalues_sym3(1, 0, 0, 1, 0, 1);
    for (double v : e3) CHECK(v == doctest::Approx(1.0));
    const auto d = eigenvalues_sym3(3, 0, 0, -1, 0, 2);
    CHECK(d[0] == doctest::Approx(3));
    CHECK(d[1] == doctest::Approx(2));
    CHECK(d[2] == doctest::Approx(-1));
}

TEST_CASE("random matrices against Eigen") {
    Rng rng(21, 0);
    for (int trial = 0; trial < 3000; ++trial) {
        const long n = 2 + trial % 5;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (long i = 0; i < n; ++i)
            for (long j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(-5, 5);
        const auto ref = oracle::eigenvalues(m);
        check_close(symmetric_eigenvalues(from_eigen(m)), ref, 1e-11);
        check_close(jacobi_eigenvalues(from_eigen(m)), ref, 1e-11);
    }
}

TEST_CASE("repeated and nearly repeated roots") {
    Rng rng(22, 0);
    const std::vector<std::vector<double>> spectra{{2, 2, -1}, {1, 1, 1}, {5, 5 + 1e-9, 0}, {0, 0, 0},
                                                   {3, -2, -2}, {1e-8, 0, -1e-8}, {4, 4}, {1, 1 + 1e-10}};
    for (const auto& d : spectra)
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::MatrixXd m = with_spectrum(rng, d);
            std::vector<double> ref = d;
            std::sort(ref.begin(), ref.end(), std::greater<>());
            check_close(symmetric_eigenvalues(from_eigen(m)), ref, 1e-10);
        }
}

}
