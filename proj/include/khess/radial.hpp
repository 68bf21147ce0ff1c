#pragma once

#include <functional>
#include <vector>

namespace khess {

/// Radially symmetric solution of σ_k(D²u) = f(r) in the ball of radius R with
/// u(R) = 0. Nodes are uniform in r; `slope` holds u'(r).
class RadialProfile {
public:
    RadialProfile(int n, int k, double radius, std::function<double(double)> f, int mesh);

    int n() const { return n_; }
    int k() const { return k_; }
    double radius() const { return radius_; }
    const std::vector<double>& r() const { return r_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& slope() const { return slope_; }

    /// Cubic Hermite interpolation inside the ball; beyond the radius the ODE is
    /// continued with the same f.
    double operator()(double r) const;

    /// u'(r) = (G(r)/r^{n−k})^{1/k}, G = k/C(n−1,k−1)·∫_0^r s^{n−1}f(s) ds.
    double derivative(double r) const;

private:
    double mass(double r) const;  // G(r), quadrature from the nearest node below

    int n_;
    int k_;
    double radius_;
    std::function<double(double)> f_;
    std::vector<double> r_;
    std::vector<double> u_;
    std::vector<double> slope_;
    std::vector<double> mass_;
};

/// Constant right-hand side: exactly u(r) = c(r² − R²)/2 with C(n,k)c^k = f_const.
RadialProfile solve_radial(double ball_radius, int n, int k, double f_const, int mesh);
RadialProfile solve_radial(double ball_radius, int n, int k, std::function<double(double)> f, int mesh);

/// c with C(n,k)c^k = f.
double radial_coefficient(int n, int k, double f);

}  // namespace khess
