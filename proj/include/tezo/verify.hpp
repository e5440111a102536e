#ifndef TEZO_VERIFY_HPP
#define TEZO_VERIFY_HPP

#include <cstdint>
#include <vector>

#include "tezo/matrix.hpp"

namespace tezo {

struct StatReport {
  std::size_t m = 0, n = 0, r = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  Matrix target;        // the fixed gradient g
  Matrix mean;          // per-entry Monte Carlo mean of the estimator
  Matrix se;            // per-entry standard error of the mean
  double max_abs_z = 0.0;     // max |mean - g| / se over entries
  double emp_second_moment = 0.0;  // mean ||est - g||^2
  double predicted = 0.0;          // delta * ||g||^2
  double var_ratio = 0.0;          // empirical / predicted
  double delta = 0.0;
};

// Monte Carlo check of the estimator moments: per trial, fresh (u, v, tau),
// kappa = <g, Z> (the rho -> 0 quadratic limit), estimator (1/r) kappa Z.
// zero_gradient forces g = 0 and reports exact zeros.
StatReport theorem1_check(std::size_t m, std::size_t n, std::size_t r,
                          std::uint64_t trials, std::uint64_t seed,
                          bool zero_gradient = false);

struct CrossTermReport {
  std::size_t m = 0, n = 0, r = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  Matrix mean;  // per-entry mean of the cross term
  Matrix se;
  double max_abs_z = 0.0;
  bool exact_zero = false;  // r == 1, empty cross sum
};

// Per-entry statistics of the cross term
// sum_{p != q} tau_p tau_q (u_p u_q o v_p v_q), which should be zero-mean.
CrossTermReport cross_term_stats(std::size_t m, std::size_t n, std::size_t r,
                                 std::uint64_t trials, std::uint64_t seed);

struct MomentErrorTrace {
  std::size_t m = 0, n = 0, r = 0;
  double beta2 = 0.99;
  std::uint64_t seed = 0;
  // err_norm[t] = ||V_t - Vhat_t||_F / (m n) for t = 1..T, with the dense
  // and separable accumulators fed identical (tau, u, v) draws.
  std::vector<double> err_norm;
  double terminal() const { return err_norm.empty() ? 0.0 : err_norm.back(); }
};

// Coupled accumulation of the dense second moment
//   V_{t+1} = b2 V_t + (1 - b2) (kappa sum_s tau_s u_s o v_s)^2
// and its separable approximation
//   Vhat_{t+1} = b2 Vhat_t + (1 - b2) kappa^2 sum_s tau_s^2 u_s^2 o v_s^2,
// kappa fixed (the appendix protocol uses kappa = 1).
MomentErrorTrace accumulated_moment_error(std::size_t m, std::size_t n,
                                          std::size_t r, std::uint64_t T,
                                          double beta2, std::uint64_t seed,
                                          double kappa = 1.0);

}  // namespace tezo

#endif  // TEZO_VERIFY_HPP
