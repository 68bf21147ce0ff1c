#include "khess/symeig.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace khess {

std::vector<double> jacobi_eigenvalues(const SymMatrix& m, double tol) {
    const std::size_t n = m.size();
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    const double norm = m.frobenius();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * at(i, j) * at(i, j);
        if (std::sqrt(off) <= tol * norm || off == 0.0) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < n; ++r) {
                    const double arp = at(r, p), arq = at(r, q);
                    at(r, p) = c * arp - s * arq;
                    at(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double apr = at(p, r), aqr = at(q, r);
                    at(p, r) = c * apr - s * aqr;
                    at(q, r) = s * apr + c * aqr;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

std::array<double, 2> eigenvalues_sym2(double a00, double a01, double a11) {
    const double mean = 0.5 * (a00 + a11);
    const double rad = std::hypot(0.5 * (a00 - a11), a01);
    return {mean + rad, mean - rad};
}

std::array<double, 3> eigenvalues_sym3(double a00, double a01, double a02, double a11, double a12,
                                       double a22) {
    const double q = (a00 + a11 + a22) / 3.0;
    const double p1 = a01 * a01 + a02 * a02 + a12 * a12;
    const double d0 = a00 - q, d1 = a11 - q, d2 = a22 - q;
    const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    const double scale = std::max({std::abs(a00), std::abs(a11), std::abs(a22), std::sqrt(p1)});
    if (p2 <= 1e-30 * scale * scale || p2 == 0.0) return {q, q, q};

    const double p = std::sqrt(p2 / 6.0);
    const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p;
    const double b01 = a01 / p, b02 = a02 / p, b12 = a12 / p;
    const double det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                       b02 * (b01 * b12 - b11 * b02);
    const double r = std::clamp(0.5 * det, -1.0, 1.0);

    // acos loses accuracy as |r| -> 1 (two eigenvalues nearly equal).
    if (1.0 - std::abs(r) < 1e-4) {
        SymMatrix m(3);
        m.set(0, 0, a00);
        m.set(0, 1, a01);
        m.set(0, 2, a02);
        m.set(1, 1, a11);
        m.set(1, 2, a12);
        m.set(2, 2, a22);
        const auto ev = jacobi_eigenvalues(m);
        return {ev[0], ev[1], ev[2]};
    }
    const double phi = std::acos(r) / 3.0;
    const double e0 = q + 2.0 * p * std::cos(phi);
    const double e2 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double e1 = 3.0 * q - e0 - e2;
    return {e0, e1, e2};
}

std::vector<double> symmetric_eigenvalues(const SymMatrix& m) {
    switch (m.size()) {
        case 1:
            return {m(0, 0)};
        case 2: {
            const auto e = eigenvalues_sym2(m(0, 0), m(0, 1), m(1, 1));
            return {e[0], e[1]};
        }
        case 3: {
            const auto e = eigenvalues_sym3(m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2));
            return {e[0], e[1], e[2]};
        }
        default:
            return jacobi_eigenvalues(m);
    }
}

}  // namespace khess
