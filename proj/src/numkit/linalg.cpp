#include "c2bnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "c2bnet/kernels.hpp"

namespace c2bnet::numkit {

namespace k = c2bnet::kernels;

Vector matvec(const Matrix& A, const Vector& x) {
  if (A.cols() != x.size())
    throw std::invalid_argument("matvec: A.cols != len(x)");
  const auto& kt = k::table();
  Vector y(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    y[i] = kt.dot(A.row(i), x.data(), A.cols());
  return y;
}

void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C) {
  if (A.cols() != B.rows())
    throw std::invalid_argument("gemm_nn: inner dimension mismatch");
  if (C.rows() != A.rows() || C.cols() != B.cols())
    throw std::invalid_argument("gemm_nn: output shape mismatch");
  const auto& kt = k::table();
  C.fill(0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double* ci = C.row(i);
    const double* ai = A.row(i);
    for (std::size_t l = 0; l < A.cols(); ++l)
      kt.axpy(B.cols(), ai[l], B.row(l), ci);
  }
}

void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C) {
  if (A.cols() != B.cols())
    throw std::invalid_argument("gemm_nt: inner dimension mismatch");
  if (C.rows() != A.rows() || C.cols() != B.rows())
    throw std::invalid_argument("gemm_nt: output shape mismatch");
  const auto& kt = k::table();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double* ci = C.row(i);
    const double* ai = A.row(i);
    for (std::size_t j = 0; j < B.rows(); ++j)
      ci[j] = kt.dot(ai, B.row(j), A.cols());
  }
}

void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C) {
  if (A.rows() != B.rows())
    throw std::invalid_argument("gemm_tn: inner dimension mismatch");
  if (C.rows() != A.cols() || C.cols() != B.cols())
    throw std::invalid_argument("gemm_tn: output shape mismatch");
  const auto& kt = k::table();
  C.fill(0.0);
  for (std::size_t l = 0; l < A.rows(); ++l) {
    const double* al = A.row(l);
    const double* bl = B.row(l);
    for (std::size_t i = 0; i < A.cols(); ++i)
      kt.axpy(B.cols(), al[i], bl, C.row(i));
  }
}

CgResult conjugate_gradient(
    const std::function<void(const Vector&, Vector&)>& apply_A, const Vector& b,
    double tol, std::size_t max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("conjugate_gradient: tol <= 0");
  const auto& kt = k::table();
  const std::size_t n = b.size();

  CgResult res;
  res.x.assign(n, 0.0);
  const double bnorm = std::sqrt(kt.dot(b.data(), b.data(), n));
  if (bnorm == 0.0) return res; // x = 0 solves exactly

  Vector r = b; // r = b - A*0
  Vector p = r;
  Vector Ap(n);
  double rr = kt.dot(r.data(), r.data(), n);

  for (std::size_t it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= tol * bnorm) {
      res.iterations = it;
      res.relative_residual = std::sqrt(rr) / bnorm;
      return res;
    }
    apply_A(p, Ap);
    const double pAp = kt.dot(p.data(), Ap.data(), n);
    if (!(pAp > 0.0))
      throw std::runtime_error("conjugate_gradient: operator not positive definite");
    const double alpha = rr / pAp;
    kt.axpy(n, alpha, p.data(), res.x.data());
    kt.axpy(n, -alpha, Ap.data(), r.data());
    const double rr_new = kt.dot(r.data(), r.data(), n);
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
  const double final_rel = std::sqrt(rr) / bnorm;
  if (final_rel <= tol) {
    res.iterations = max_iter;
    res.relative_residual = final_rel;
    return res;
  }
  std::ostringstream msg;
  msg << "conjugate_gradient: no convergence in " << max_iter
      << " iterations, relative residual " << final_rel;
  throw std::runtime_error(msg.str());
}

Vector thomas_solve(const Vector& lower, const Vector& diag,
                    const Vector& upper, const Vector& rhs) {
  const std::size_t n = diag.size();
  if (rhs.size() != n || lower.size() + 1 != n || upper.size() + 1 != n)
    throw std::invalid_argument("thomas_solve: band length mismatch");

  Vector c(n - 1 > 0 ? n - 1 : 0), d(n), x(n);
  if (diag[0] == 0.0) throw std::runtime_error("thomas_solve: zero pivot");
  if (n > 1) c[0] = upper[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double denom = diag[i] - lower[i - 1] * c[i - 1];
    if (denom == 0.0) throw std::runtime_error("thomas_solve: zero pivot");
    if (i < n - 1) c[i] = upper[i] / denom;
    d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

EigenResult symmetric_eigen_jacobi(Matrix S) {
  if (S.rows() != S.cols())
    throw std::invalid_argument("symmetric_eigen_jacobi: matrix not square");
  const std::size_t n = S.rows();
  Matrix V = Matrix::identity(n);

  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) norm += S(i, j) * S(i, j);
  norm = std::sqrt(norm);
  const double stop = (norm > 0.0 ? norm : 1.0) * 1e-14;

  const std::size_t max_sweeps = 100;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * S(i, j) * S(i, j);
    if (std::sqrt(off) <= stop) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = S(p, q);
        if (std::abs(apq) <= stop / (n * n)) continue;
        const double app = S(p, p);
        const double aqq = S(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double sip = S(i, p);
          const double siq = S(i, q);
          S(i, p) = c * sip - s * siq;
          S(i, q) = s * sip + c * siq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double spi = S(p, i);
          const double sqi = S(q, i);
          S(p, i) = c * spi - s * sqi;
          S(q, i) = s * spi + c * sqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = V(i, p);
          const double viq = V(i, q);
          V(i, p) = c * vip - s * viq;
          V(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return S(a, a) > S(b, b); });

  EigenResult res;
  res.values.resize(n);
  res.vectors = Matrix(n, n);
  for (std::size_t k2 = 0; k2 < n; ++k2) {
    res.values[k2] = S(order[k2], order[k2]);
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, k2) = V(i, order[k2]);
  }
  return res;
}

SpectrumResult weighted_principal_spectrum(const Matrix& X,
                                           const Vector& weights,
                                           std::size_t kk) {
  const std::size_t n = X.rows();
  const std::size_t D = X.cols();
  if (weights.size() != D)
    throw std::invalid_argument("weighted_principal_spectrum: weight length mismatch");
  if (kk > D)
    throw std::invalid_argument("weighted_principal_spectrum: k > D");
  for (double w : weights)
    if (!(w > 0.0))
      throw std::invalid_argument("weighted_principal_spectrum: weights must be positive");

  Vector sqw(D);
  for (std::size_t j = 0; j < D; ++j) sqw[j] = std::sqrt(weights[j]);

  // Second-moment matrix of the weight-scaled rows.
  Matrix Xs(n, D);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < D; ++j) Xs(i, j) = X(i, j) * sqw[j];
  Matrix M(D, D);
  gemm_tn(Xs, Xs, M);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) M(i, j) *= inv_n;

  EigenResult eig = symmetric_eigen_jacobi(std::move(M));

  SpectrumResult res;
  res.values.assign(eig.values.begin(), eig.values.begin() + kk);
  res.vectors = Matrix(D, kk);
  // undo the √w scaling so columns are orthonormal in the weighted product
  for (std::size_t c = 0; c < kk; ++c)
    for (std::size_t j = 0; j < D; ++j)
      res.vectors(j, c) = eig.vectors(j, c) / sqw[j];
  return res;
}

double cholesky_factor(Matrix& A) {
  const std::size_t n = A.rows();
  if (A.cols() != n)
    throw std::invalid_argument("cholesky_factor: matrix not square");
  double min_piv = 0.0, max_piv = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = A(j, j);
    for (std::size_t s = 0; s < j; ++s) d -= A(j, s) * A(j, s);
    if (!(d > 0.0))
      throw std::runtime_error("cholesky_factor: matrix not positive definite");
    const double ljj = std::sqrt(d);
    A(j, j) = ljj;
    if (j == 0) {
      min_piv = max_piv = ljj;
    } else {
      min_piv = std::min(min_piv, ljj);
      max_piv = std::max(max_piv, ljj);
    }
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = A(i, j);
      for (std::size_t s = 0; s < j; ++s) v -= A(i, s) * A(j, s);
      A(i, j) = v / ljj;
      A(j, i) = 0.0;
    }
  }
  const double r = max_piv / min_piv;
  return r * r;
}

void cholesky_solve_factored(const Matrix& L, Vector& b) {
  const std::size_t n = L.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t j = 0; j < i; ++j) v -= L(i, j) * b[j];
    b[i] = v / L(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = b[i];
    for (std::size_t j = i + 1; j < n; ++j) v -= L(j, i) * b[j];
    b[i] = v / L(i, i);
  }
}

Vector cholesky_solve(const Matrix& A, const Vector& b) {
  if (A.rows() != b.size())
    throw std::invalid_argument("cholesky_solve: dimension mismatch");
  Matrix L = A;
  cholesky_factor(L);
  Vector x = b;
  cholesky_solve_factored(L, x);
  return x;
}

} // namespace c2bnet::numkit
