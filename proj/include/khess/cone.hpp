#pragma once

#include "khess/symfun.hpp"

#include <span>
#include <vector>

namespace khess {

/// Largest m with λ ∈ Γ_m, plus σ_1..σ_n. `margins[m-1]` holds σ_m(λ).
struct ConeVerdict {
    int max_level = 0;
    std::vector<double> margins;

    bool in_cone(int k) const { return max_level >= k; }
};

ConeVerdict classify(const Spectrum& lam);

/// Open cone Γ_k: σ_1..σ_k strictly positive.
bool in_cone(std::span<const double> lam, int k);

/// Closed cone with slack: σ_m(λ) ≥ −tol·max(1,|λ|_∞)^m for m = 1..k.
bool in_closed_cone(std::span<const double> lam, int k, double tol = 1e-12);

/// Smallest K0 with (K0/n)^k ≥ sup_f, so that D²u + K0·I ≥ 0 for k+1 convex u.
struct ShiftBound {
    double K0 = 0.0;
    double sup_f = 0.0;
    int n = 0;
    int k = 0;
};

ShiftBound compute_shift(double sup_f, int n, int k);

Spectrum shift_spectrum(const Spectrum& lam, double K0);

/// Σ_{i=k}^n λ_i > 0 (sorted non-increasing; `k` is 1-based as in Γ_k).
bool tail_positivity_check(const Spectrum& lam, int k);

/// σ_k(λ) ≥ λ_1⋯λ_k ≥ λ_k^k with 1e-12 relative slack.
bool product_bound_check(const Spectrum& lam, int k);

}  // namespace khess
