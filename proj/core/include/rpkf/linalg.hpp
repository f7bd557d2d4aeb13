#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rpkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown for any input that violates a documented precondition
/// (dimension mismatch, invalid probability, non-PSD covariance, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace linalg {

// Condition-number ceiling above which the gain falls back to the
// Moore-Penrose pseudo-inverse.
inline constexpr double kMaxConditionForSolve = 1e12;
// Relative singular-value cutoff for the pseudo-inverse.
inline constexpr double kPinvRelativeCutoff = 1e-12;

/// (M + Mᵀ) / 2. The result is exactly symmetric bitwise.
Matrix symmetrize(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol);

/// Symmetric within `tol` and smallest eigenvalue ≥ -tol·max(1, trace).
bool is_psd(const Matrix& m, double tol = 1e-10);

/// Throws InvalidInput naming `what` unless `m` is square, symmetric and PSD.
void require_psd(const Matrix& m, const std::string& what, double tol = 1e-10);

/// Pseudo-inverse of a symmetric PSD matrix through its eigendecomposition,
/// truncating eigenvalues below kPinvRelativeCutoff·λ_max.
Matrix pinv_symmetric(const Matrix& s);

/// Pseudo-inverse of an arbitrary matrix via SVD with the same cutoff.
Matrix pinv(const Matrix& a);

/// Returns B·S⁺ for symmetric PSD S. Uses a Cholesky solve when S is
/// well conditioned (cond < kMaxConditionForSolve), the pseudo-inverse
/// otherwise.
Matrix right_solve_psd(const Matrix& b, const Matrix& s);

/// A matrix L with L·Lᵀ = S for symmetric PSD S (may be singular).
Matrix psd_sqrt(const Matrix& s);

/// Largest absolute entry of a - b relative to max(1, |b|_max).
double relative_error(const Matrix& a, const Matrix& b);

}  // namespace linalg
}  // namespace rpkf
