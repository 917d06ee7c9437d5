#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace c2bnet::harness::verify {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Max relative backprop-vs-central-difference error over `num_nets` random
/// small coefficient-to-basis networks under the quadrature loss. Nets and
/// inputs are resampled when a pre-activation sits within 1e-4 of a ReLU
/// kink, where finite differences are meaningless.
double gradient_check_batch(std::size_t num_nets, std::uint64_t seed);

struct EllipticOracle {
  double max_err_fine = 0.0;  // kappa=1 manufactured solution at 64x64
  double observed_order = 0.0; // log2(err32/err64)
};
EllipticOracle elliptic_manufactured_oracle();

double heat_mode_decay_error();  // sin(pi x) vs exp(-pi^2 T) at T=0.01
double heat_mode_ratio_error();  // sin(2 pi x) relative mode decay
double rte_constant_error();     // sigma=0, uniform inflow -> constant
double rte_isotropic_error();    // uniform sigma, isotropic inflow fixed point
double quadrature_volume_error();       // max |Σ tau - |Ω|| over grid kinds
double quadrature_sin_orthogonality();  // <sin(pi x), sin(2 pi x)> on 257 nodes
double kernel_backend_divergence();     // scalar vs SIMD dot/axpy, 0 if one backend

/// The quick verification bundle behind the `verify` subcommand: gradient
/// checks, solver oracles, quadrature checks, kernel equivalence.
std::vector<Check> run_verify_checks(std::size_t grad_nets = 20,
                                     std::uint64_t seed = 1234);

} // namespace c2bnet::harness::verify
