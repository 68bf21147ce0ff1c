#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace khess {

/// Real spectrum (eigenvalues of a Hessian). Indices are 0-based throughout
/// the library; the mathematical λ_1 is `lam[0]`.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> values);
    Spectrum(std::initializer_list<double> values);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

    /// Same values in non-increasing order.
    Spectrum sorted() const;

private:
    std::vector<double> values_;
};

/// Dense symmetric matrix. Writes go to both (i,j) and (j,i).
class SymMatrix {
public:
    explicit SymMatrix(std::size_t n);
    static SymMatrix diagonal(std::span<const double> d);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v);
    bool is_diagonal() const;
    double trace() const;
    double frobenius() const;

private:
    std::size_t n_;
    std::vector<double> a_;
};

/// Third derivatives u_{pph} for one fixed direction h; `offdiag` holds u_{pqh}
/// when a full slice is available.
struct TensorSlice {
    std::vector<double> diag;
    std::optional<SymMatrix> offdiag;
};

// Coefficients e_0..e_n of prod_i (1 + λ_i t); e_j = σ_j.
std::vector<double> elementary_all(std::span<const double> lam);

/// σ_k(λ). Throws DomainError unless 0 ≤ k ≤ n.
double sigma(int k, const Spectrum& lam);
double sigma(int k, std::span<const double> lam);

/// σ_k(λ | excluded): σ_k with the listed entries removed (at most two); 0 when
/// fewer than k entries remain.
double sigma_restricted(int k, const Spectrum& lam, std::initializer_list<std::size_t> excluded);
double sigma_restricted(int k, const Spectrum& lam, std::span<const std::size_t> excluded);

/// ∂σ_k/∂λ_i = σ_{k-1}(λ|i).
double sigma_d1(int k, const Spectrum& lam, std::size_t i);

/// ∂²σ_k/∂λ_p∂λ_q = σ_{k-2}(λ|pq) for p ≠ q, and 0 on the diagonal.
double sigma_d2(int k, const Spectrum& lam, std::size_t p, std::size_t q);

/// (σ_k)_h = Σ_p σ_k^{pp} u_{pph}.
double directional_d1(int k, const Spectrum& lam, const TensorSlice& slice);

/// Σ_{p,q} σ_k^{pp,qq} u_{pph} u_{qqh}.
double directional_d2(int k, const Spectrum& lam, const TensorSlice& slice);

/// A symmetric function of the spectrum: σ_k, or the quotient σ_k/σ_l when l ≥ 0.
struct SymFun {
    int k = 1;
    int l = -1;

    static SymFun sigma(int k) { return {k, -1}; }
    static SymFun quotient(int k, int l) { return {k, l}; }
    bool is_quotient() const { return l >= 0; }

    double value(const Spectrum& lam) const;
    double d1(const Spectrum& lam, std::size_t i) const;
    double d2(const Spectrum& lam, std::size_t p, std::size_t q) const;
};

inline constexpr double kDegenerateGap = 1e-9;

/// Second derivative of F(A) in direction B at a diagonal A with distinct
/// eigenvalues:
///   Σ f̈^{jk} B_jj B_kk + 2 Σ_{j<k} (ḟ^j − ḟ^k)/(κ_j − κ_k) B_jk².
/// Throws DegenerateSpectrum when |κ_j − κ_k| < gap_tol·max(1,|κ_j|,|κ_k|).
double second_derivative_form(const SymFun& f, const SymMatrix& A, const SymMatrix& B,
                              double gap_tol = kDegenerateGap);

/// Same form, but near-coincident pairs use the analytic limit of the divided
/// difference, f̈^{jj} − f̈^{jk} (equal to −σ_{k-2}(λ|jk) for F = σ_k).
double second_derivative_form_limit(const SymFun& f, const SymMatrix& A, const SymMatrix& B,
                                    double gap_tol = kDegenerateGap);

/// c_{n,k} with σ_{k-1} = c σ_1^{1/(k-1)} σ_k^{(k-2)/(k-1)} at λ = (1,…,1).
double newton_maclaurin_constant(std::size_t n, int k);

/// σ_{k-1}(λ) − c_{n,k} σ_1^{1/(k-1)} σ_k^{(k-2)/(k-1)}; nonnegative on Γ_k.
double newton_maclaurin_gap(const Spectrum& lam, int k);

double binomial(int n, int k);

}  // namespace khess
