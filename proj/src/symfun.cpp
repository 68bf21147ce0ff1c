#include "khess/symfun.hpp"

#include "khess/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace khess {

Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw DomainError("spectrum needs n >= 2");
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("spectrum entries must be finite");
    }
}

Spectrum::Spectrum(std::initializer_list<double> values) : Spectrum(std::vector<double>(values)) {}

Spectrum Spectrum::sorted() const {
    std::vector<double> v = values_;
    std::sort(v.begin(), v.end(), std::greater<>());
    return Spectrum(std::move(v));
}

SymMatrix::SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {
    if (n == 0) throw DomainError("empty matrix");
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
    return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
}

bool SymMatrix::is_diagonal() const {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            if (i != j && a_[i * n_ + j] != 0.0) return false;
    return true;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += a_[i * n_ + i];
    return t;
}

double SymMatrix::frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
}

std::vector<double> elementary_all(std::span<const double> lam) {
    std::vector<double> e(lam.size() + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        for (std::size_t j = i + 1; j >= 1; --j) e[j] += lam[i] * e[j - 1];
    }
    return e;
}

namespace {

// σ_k with the convention σ_k = 0 for k < 0 or k > n.
double sigma_ext(int k, std::span<const double> lam) {
    if (k < 0 || k > static_cast<int>(lam.size())) return 0.0;
    if (k == 0) return 1.0;
    std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const std::size_t top = std::min<std::size_t>(i + 1, static_cast<std::size_t>(k));
        for (std::size_t j = top; j >= 1; --j) e[j] += lam[i] * e[j - 1];
    }
    return e[static_cast<std::size_t>(k)];
}

std::vector<double> without(std::span<const double> lam, std::span<const std::size_t> excluded) {
    std::vector<double> rest;
    rest.reserve(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) {
        if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) rest.push_back(lam[i]);
    }
    return rest;
}

void check_index(std::size_t i, std::size_t n) {
    if (i >= n) throw DomainError("index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
}

double restricted_ext(int k, std::span<const double> lam, std::initializer_list<std::size_t> ex) {
    return sigma_ext(k, without(lam, std::span<const std::size_t>(ex.begin(), ex.size())));
}

}  // namespace

double sigma(int k, std::span<const double> lam) {
    if (k < 0 || k > static_cast<int>(lam.size()))
        throw DomainError("sigma: k=" + std::to_string(k) + " outside 0..n");
    return sigma_ext(k, lam);
}

double sigma(int k, const Spectrum& lam) { return sigma(k, lam.values()); }

double sigma_restricted(int k, const Spectrum& lam, std::span<const std::size_t> excluded) {
    const std::size_t n = lam.size();
    if (excluded.size() > 2) throw DomainError("sigma_restricted: at most two excluded indices");
    for (std::size_t a = 0; a < excluded.size(); ++a) {
        check_index(excluded[a], n);
        for (std::size_t b = a + 1; b < excluded.size(); ++b)
            if (excluded[a] == excluded[b]) throw DomainError("sigma_restricted: repeated index");
    }
    if (k < 0 || k > static_cast<int>(n)) throw DomainError("sigma_restricted: k outside 0..n");
    if (k > static_cast<int>(n - excluded.size())) return 0.0;
    return sigma_ext(k, without(lam.values(), excluded));
}

double sigma_restricted(int k, const Spectrum& lam, std::initializer_list<std::size_t> excluded) {
    return sigma_restricted(k, lam, std::span<const std::size_t>(excluded.begin(), excluded.size()));
}

double sigma_d1(int k, const Spectrum& lam, std::size_t i) {
    check_index(i, lam.size());
    if (k < 1 || k > static_cast<int>(lam.size())) throw DomainError("sigma_d1: k outside 1..n");
    return restricted_ext(k - 1, lam.values(), {i});
}

double sigma_d2(int k, const Spectrum& lam, std::size_t p, std::size_t q) {
    check_index(p, lam.size());
    check_index(q, lam.size());
    if (k < 0 || k > static_cast<int>(lam.size())) throw DomainError("sigma_d2: k outside 0..n");
    if (p == q) return 0.0;
    return restricted_ext(k - 2, lam.values(), {p, q});
}

double directional_d1(int k, const Spectrum& lam, const TensorSlice& slice) {
    if (slice.diag.size() != lam.size()) throw DomainError("directional_d1: slice dimension mismatch");
    double s = 0.0;
    for (std::size_t p = 0; p < lam.size(); ++p) s += sigma_d1(k, lam, p) * slice.diag[p];
    return s;
}

double directional_d2(int k, const Spectrum& lam, const TensorSlice& slice) {
    if (slice.diag.size() != lam.size()) throw DomainError("directional_d2: slice dimension mismatch");
    double s = 0.0;
    for (std::size_t p = 0; p < lam.size(); ++p)
        for (std::size_t q = 0; q < lam.size(); ++q)
            if (p != q) s += sigma_d2(k, lam, p, q) * slice.diag[p] * slice.diag[q];
    return s;
}

double SymFun::value(const Spectrum& lam) const {
    if (!is_quotient()) return khess::sigma(k, lam);
    const double sl = khess::sigma(l, lam);
    if (sl == 0.0) throw DomainError("quotient: sigma_l vanishes");
    return khess::sigma(k, lam) / sl;
}

double SymFun::d1(const Spectrum& lam, std::size_t i) const {
    auto first = [&](int m) { return m == 0 ? 0.0 : sigma_d1(m, lam, i); };
    if (!is_quotient()) return first(k);
    const double sk = khess::sigma(k, lam);
    const double sl = khess::sigma(l, lam);
    return (first(k) * sl - sk * first(l)) / (sl * sl);
}

double SymFun::d2(const Spectrum& lam, std::size_t p, std::size_t q) const {
    if (!is_quotient()) return sigma_d2(k, lam, p, q);
    auto first = [&](int m, std::size_t i) { return m == 0 ? 0.0 : sigma_d1(m, lam, i); };
    const double sk = khess::sigma(k, lam);
    const double sl = khess::sigma(l, lam);
    const double kp = first(k, p), kq = first(k, q), lp = first(l, p), lq = first(l, q);
    return sigma_d2(k, lam, p, q) / sl - (kp * lq + kq * lp) / (sl * sl) -
           sk * sigma_d2(l, lam, p, q) / (sl * sl) + 2.0 * sk * lp * lq / (sl * sl * sl);
}

namespace {

double form_impl(const SymFun& f, const SymMatrix& A, const SymMatrix& B, double gap_tol, bool use_limit) {
    const std::size_t n = A.size();
    if (B.size() != n) throw DomainError("second_derivative_form: A and B differ in size");
    if (!A.is_diagonal()) throw DomainError("second_derivative_form: A must be diagonal");
    std::vector<double> kappa(n);
    for (std::size_t i = 0; i < n; ++i) kappa[i] = A(i, i);
    const Spectrum lam(kappa);

    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) total += f.d2(lam, j, k) * B(j, j) * B(k, k);

    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            if (B(j, k) == 0.0) continue;
            const double gap = kappa[j] - kappa[k];
            const double scale = std::max({1.0, std::abs(kappa[j]), std::abs(kappa[k])});
            double quotient;
            if (std::abs(gap) < gap_tol * scale) {
                if (!use_limit)
                    throw DegenerateSpectrum("second_derivative_form: eigenvalues " + std::to_string(j) +
                                             " and " + std::to_string(k) + " coincide");
                quotient = f.d2(lam, j, j) - f.d2(lam, j, k);
            } else {
                quotient = (f.d1(lam, j) - f.d1(lam, k)) / gap;
            }
            total += 2.0 * quotient * B(j, k) * B(j, k);
        }
    }
    return total;
}

}  // namespace

double second_derivative_form(const SymFun& f, const SymMatrix& A, const SymMatrix& B, double gap_tol) {
    return form_impl(f, A, B, gap_tol, false);
}

double second_derivative_form_limit(const SymFun& f, const SymMatrix& A, const SymMatrix& B, double gap_tol) {
    return form_impl(f, A, B, gap_tol, true);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

double newton_maclaurin_constant(std::size_t n, int k) {
    if (k < 2 || k > static_cast<int>(n)) throw DomainError("newton_maclaurin: k outside 2..n");
    const int nn = static_cast<int>(n);
    const double km1 = k - 1.0;
    return binomial(nn, k - 1) /
           (std::pow(static_cast<double>(n), 1.0 / km1) * std::pow(binomial(nn, k), (k - 2.0) / km1));
}

double newton_maclaurin_gap(const Spectrum& lam, int k) {
    const double c = newton_maclaurin_constant(lam.size(), k);
    const double km1 = k - 1.0;
    const double s1 = sigma(1, lam);
    const double sk = sigma(k, lam);
    const double rhs = (k == 2) ? s1 : std::pow(s1, 1.0 / km1) * std::pow(sk, (k - 2.0) / km1);
    return sigma(k - 1, lam) - c * rhs;
}

}  // namespace khess
