#pragma once

#include <cstddef>

// Data-parallel inner loops behind the linear algebra, network training and
// quadrature code. Every kernel exists in a scalar reference version and,
// on x86-64, an AVX2 version; the active backend is chosen once at startup
// (CPU detection, overridable via the C2BNET_KERNELS environment variable or
// set_backend()).
//
// Cross-backend contract, relied on by the equivalence tests:
//   - elementwise kernels (axpy, scale, sub, relu, relu_mask_mul,
//     adam_update) produce bit-identical results on every backend: the AVX2
//     versions perform the same operations in the same per-element order and
//     do not use fused multiply-add;
//   - reductions (dot, weighted_dot, sum) may differ across backends in the
//     last few ulps because lane-wise accumulation reorders the sum (the
//     AVX2 versions do use FMA there).

namespace c2bnet::kernels {

enum class Backend { scalar, avx2 };

struct AdamParams {
  double beta1;
  double beta2;
  double eps;
  double lr;
  double bias_correction1; // 1 / (1 - beta1^t)
  double bias_correction2; // 1 / (1 - beta2^t)
};

struct KernelTable {
  const char* name;

  // reductions
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*weighted_dot)(const double* w, const double* a, const double* b,
                         std::size_t n); // sum_i w_i a_i b_i
  double (*sum)(const double* a, std::size_t n);

  // elementwise
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  void (*scale)(std::size_t n, double alpha, double* x);
  void (*sub)(std::size_t n, const double* a, const double* b, double* out);
  void (*relu)(std::size_t n, const double* x, double* y);   // y = max(0, x)
  void (*relu_mask_mul)(std::size_t n, const double* pre, const double* dy,
                        double* dx);                         // dx = dy * [pre > 0]
  void (*adam_update)(std::size_t n, double* param, const double* grad,
                      double* m, double* v, const AdamParams& p);
};

/// Best backend the current CPU supports.
Backend detect_best();

/// Force a backend (tests, benchmarking). Throws std::invalid_argument if the
/// backend was not compiled in or the CPU lacks it.
void set_backend(Backend b);

Backend active_backend();

const KernelTable& table();                // active table
const KernelTable& table_for(Backend b);   // specific table (throws if absent)
bool backend_available(Backend b);

const char* backend_name(Backend b);

} // namespace c2bnet::kernels
