#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "c2bnet/matrix.hpp"

namespace c2bnet::numkit {

using Vector = std::vector<double>;

/// y = A x. Throws std::invalid_argument on dimension mismatch.
Vector matvec(const Matrix& A, const Vector& x);

// Batched products used by the network code. All sizes are validated.
void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C); // C = A · B
void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C); // C = A · Bᵀ
void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C); // C = Aᵀ · B

struct CgResult {
  Vector x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradient for a symmetric positive definite operator.
/// Stops when ||Ax-b||_2 <= tol * ||b||_2; throws std::runtime_error carrying
/// the final residual if max_iter is exhausted first.
CgResult conjugate_gradient(
    const std::function<void(const Vector&, Vector&)>& apply_A, const Vector& b,
    double tol, std::size_t max_iter);

/// Tridiagonal solve (Thomas algorithm). lower/upper have length n-1.
/// Throws std::runtime_error on a zero pivot.
Vector thomas_solve(const Vector& lower, const Vector& diag,
                    const Vector& upper, const Vector& rhs);

struct EigenResult {
  Vector values;   // descending
  Matrix vectors;  // columns, same order as values
};

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Intended for the small dense systems here (dimension <= a few hundred).
EigenResult symmetric_eigen_jacobi(Matrix S);

struct SpectrumResult {
  Vector values;   // top-k eigenvalues of the weighted second-moment matrix
  Matrix vectors;  // D x k; columns orthonormal in the weighted inner product
};

/// Top-k eigenpairs of (1/n) Σ_i diag(√w) xᵢ xᵢᵀ diag(√w) for the rows xᵢ of
/// X (n×D). Returned columns φ satisfy Σ_k w_k φᵢ(k) φⱼ(k) = δᵢⱼ.
/// Throws std::invalid_argument if k > D or any weight is not positive.
SpectrumResult weighted_principal_spectrum(const Matrix& X,
                                           const Vector& weights,
                                           std::size_t k);

/// Solves A x = b for symmetric positive definite A via Cholesky.
/// Throws std::runtime_error if the factorization breaks down.
Vector cholesky_solve(const Matrix& A, const Vector& b);

/// In-place Cholesky factor (lower). Returns the ratio of the largest to the
/// smallest diagonal pivot squared — a cheap condition estimate.
double cholesky_factor(Matrix& A);
void cholesky_solve_factored(const Matrix& L, Vector& b);

} // namespace c2bnet::numkit
