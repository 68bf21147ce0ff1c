#include "khess/radial.hpp"

#include "khess/error.hpp"
#include "khess/symfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace khess {

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kNodes{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                        0.9061798459386640};
constexpr std::array<double, 5> kWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                          0.4786286704993665, 0.2369268850561891};

template <class F>
double gauss(double a, double b, F&& g) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < kNodes.size(); ++i) s += kWeights[i] * g(mid + half * kNodes[i]);
    return half * s;
}

}  // namespace

double radial_coefficient(int n, int k, double f) { return std::pow(f / binomial(n, k), 1.0 / k); }

RadialProfile::RadialProfile(int n, int k, double radius, std::function<double(double)> f, int mesh)
    : n_(n), k_(k), radius_(radius), f_(std::move(f)) {
    if (!(radius > 0.0)) throw DomainError("solve_radial: radius must be positive");
    if (n < 1 || k < 1 || k > n) throw DomainError("solve_radial: need 1 <= k <= n");
    if (mesh < 2) throw DomainError("solve_radial: mesh must be at least 2");
    const std::size_t m = static_cast<std::size_t>(mesh);
    r_.resize(m + 1);
    mass_.assign(m + 1, 0.0);
    slope_.assign(m + 1, 0.0);
    u_.assign(m + 1, 0.0);
    const double scale = k / binomial(n - 1, k - 1);
    for (std::size_t i = 0; i <= m; ++i) r_[i] = radius * static_cast<double>(i) / static_cast<double>(m);
    for (std::size_t i = 1; i <= m; ++i) {
        mass_[i] = mass_[i - 1] + scale * gauss(r_[i - 1], r_[i], [&](double s) {
                       const double fs = f_(s);
                       if (!(fs > 0.0)) throw DomainError("solve_radial: f must be positive");
                       return std::pow(s, n_ - 1) * fs;
                   });
        slope_[i] = derivative(r_[i]);
    }
    for (std::size_t i = m; i-- > 0;)
        u_[i] = u_[i + 1] - gauss(r_[i], r_[i + 1], [&](double s) { return derivative(s); });
}

double RadialProfile::mass(double r) const {
    const double h = r_[1] - r_[0];
    const std::size_t last = r_.size() - 1;
    const std::size_t i = std::min(last, static_cast<std::size_t>(std::max(0.0, std::floor(r / h))));
    const double scale = k_ / binomial(n_ - 1, k_ - 1);
    return mass_[i] + scale * gauss(r_[i], r, [&](double s) { return std::pow(s, n_ - 1) * f_(s); });
}

double RadialProfile::derivative(double r) const {
    if (r <= 0.0) return 0.0;
    const double g = mass(r);
    return std::pow(std::max(g, 0.0) / std::pow(r, n_ - k_), 1.0 / k_);
}

double RadialProfile::operator()(double r) const {
    r = std::abs(r);
    if (r >= radius_) return gauss(radius_, r, [&](double s) { return derivative(s); });
    const double h = r_[1] - r_[0];
    const std::size_t i = std::min(r_.size() - 2, static_cast<std::size_t>(r / h));
    const double t = (r - r_[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * u_[i] + h10 * h * slope_[i] + h01 * u_[i + 1] + h11 * h * slope_[i + 1];
}

RadialProfile solve_radial(double ball_radius, int n, int k, double f_const, int mesh) {
    if (!(f_const > 0.0)) throw DomainError("solve_radial: f must be positive");
    return RadialProfile(n, k, ball_radius, [f_const](double) { return f_const; }, mesh);
}

RadialProfile solve_radial(double ball_radius, int n, int k, std::function<double(double)> f, int mesh) {
    return RadialProfile(n, k, ball_radius, std::move(f), mesh);
}

}  // namespace khess
