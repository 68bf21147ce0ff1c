#include "khess/cone.hpp"

#include "khess/error.hpp"

#include <algorithm>
#include <cmath>

namespace khess {

ConeVerdict classify(const Spectrum& lam) {
    const auto e = elementary_all(lam.values());
    ConeVerdict v;
    v.margins.assign(e.begin() + 1, e.end());
    while (v.max_level < static_cast<int>(v.margins.size()) && v.margins[v.max_level] > 0.0) ++v.max_level;
    return v;
}

bool in_cone(std::span<const double> lam, int k) {
    const auto e = elementary_all(lam);
    for (int m = 1; m <= k && m < static_cast<int>(e.size()); ++m)
        if (!(e[m] > 0.0)) return false;
    return k < static_cast<int>(e.size());
}

bool in_closed_cone(std::span<const double> lam, int k, double tol) {
    double scale = 1.0;
    for (double x : lam) scale = std::max(scale, std::abs(x));
    const auto e = elementary_all(lam);
    double power = 1.0;
    for (int m = 1; m <= k && m < static_cast<int>(e.size()); ++m) {
        power *= scale;
        if (e[m] < -tol * power) return false;
    }
    return true;
}

ShiftBound compute_shift(double sup_f, int n, int k) {
    if (!(sup_f > 0.0)) throw DomainError("compute_shift: sup_f must be positive");
    if (k < 1 || k > n) throw DomainError("compute_shift: k outside 1..n");
    return {n * std::pow(sup_f, 1.0 / k), sup_f, n, k};
}

Spectrum shift_spectrum(const Spectrum& lam, double K0) {
    std::vector<double> v(lam.values().begin(), lam.values().end());
    for (double& x : v) x += K0;
    return Spectrum(std::move(v));
}

bool tail_positivity_check(const Spectrum& lam, int k) {
    const Spectrum s = lam.sorted();
    if (k < 1 || k > static_cast<int>(s.size())) throw DomainError("tail_positivity_check: k outside 1..n");
    double tail = 0.0;
    for (std::size_t i = static_cast<std::size_t>(k - 1); i < s.size(); ++i) tail += s[i];
    return tail > 0.0;
}

bool product_bound_check(const Spectrum& lam, int k) {
    const Spectrum s = lam.sorted();
    if (k < 1 || k > static_cast<int>(s.size())) throw DomainError("product_bound_check: k outside 1..n");
    double prod = 1.0;
    for (int i = 0; i < k; ++i) prod *= s[i];
    const double lk = std::pow(s[k - 1], k);
    const double sk = sigma(k, s);
    const double slack = 1e-12 * std::max({std::abs(sk), std::abs(prod), 1e-300});
    return sk >= prod - slack && prod >= lk - 1e-12 * std::max(std::abs(prod), 1e-300);
}

}  // namespace khess
