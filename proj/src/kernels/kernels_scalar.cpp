#include "c2bnet/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, no pairwise tricks: these define the
// semantics the SIMD variants are tested against.

namespace c2bnet::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double weighted_dot_scalar(const double* w, const double* a, const double* b,
                           std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * (a[i] * b[i]);
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_scalar(std::size_t n, double alpha, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = alpha * x[i];
}

void sub_scalar(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void relu_scalar(std::size_t n, const double* x, double* y) {
  // (x > 0) ? x : 0 rather than max(): pins the -0.0 and NaN behavior the
  // AVX2 mask implementation reproduces bit-for-bit.
  for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] > 0.0) ? x[i] : 0.0;
}

void relu_mask_mul_scalar(std::size_t n, const double* pre, const double* dy,
                          double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = (pre[i] > 0.0) ? dy[i] : 0.0;
}

void adam_update_scalar(std::size_t n, double* param, const double* grad,
                        double* m, double* v, const AdamParams& p) {
  const double one_minus_b1 = 1.0 - p.beta1;
  const double one_minus_b2 = 1.0 - p.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    const double mi = p.beta1 * m[i] + one_minus_b1 * g;
    const double vi = p.beta2 * v[i] + one_minus_b2 * (g * g);
    m[i] = mi;
    v[i] = vi;
    const double mhat = mi * p.bias_correction1;
    const double vhat = vi * p.bias_correction2;
    const double denom = std::sqrt(vhat) + p.eps;
    param[i] = param[i] - p.lr * (mhat / denom);
  }
}

} // namespace

const KernelTable& scalar_table() {
  static const KernelTable t = {
      "scalar",
      dot_scalar,
      weighted_dot_scalar,
      sum_scalar,
      axpy_scalar,
      scale_scalar,
      sub_scalar,
      relu_scalar,
      relu_mask_mul_scalar,
      adam_update_scalar,
  };
  return t;
}

} // namespace c2bnet::kernels
