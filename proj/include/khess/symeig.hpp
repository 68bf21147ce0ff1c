#pragma once

#include "khess/symfun.hpp"

#include <array>
#include <vector>

namespace khess {

inline constexpr double kEigenTolerance = 1e-12;

/// Eigenvalues in non-increasing order. Closed form for n = 2, trigonometric
/// form for n = 3 with a Jacobi fallback near repeated roots, Jacobi otherwise.
std::vector<double> symmetric_eigenvalues(const SymMatrix& m);

/// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm is below
/// `tol`·‖m‖_F. Non-increasing order.
std::vector<double> jacobi_eigenvalues(const SymMatrix& m, double tol = kEigenTolerance);

std::array<double, 2> eigenvalues_sym2(double a00, double a01, double a11);
std::array<double, 3> eigenvalues_sym3(double a00, double a01, double a02, double a11, double a12,
                                       double a22);

}  // namespace khess
