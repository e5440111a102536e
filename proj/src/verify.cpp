#include "tezo/verify.hpp"

#include <cmath>

#include "tezo/estimators.hpp"
#include "tezo/lowrank.hpp"
#include "tezo/rng.hpp"

namespace tezo {

namespace {

constexpr std::uint64_t kTargetTag = 0x6A1D;
constexpr std::uint64_t kTrialTag = 0x7121;

// Fresh (u, v, tau) for one trial, drawn in the init_factors order.
struct TrialDraw {
  Matrix u, v;
  std::vector<double> tau;
};

TrialDraw draw_trial(std::size_t m, std::size_t n, std::size_t r,
                     std::uint64_t trial_seed) {
  TrialDraw d;
  d.u = Matrix(m, r);
  d.v = Matrix(n, r);
  GaussianStream g(trial_seed);
  for (std::size_t s = 0; s < r; ++s)
    for (std::size_t i = 0; i < m; ++i) d.u(i, s) = g.next();
  for (std::size_t s = 0; s < r; ++s)
    for (std::size_t j = 0; j < n; ++j) d.v(j, s) = g.next();
  d.tau = g.sample(r);
  return d;
}

}  // namespace

StatReport theorem1_check(std::size_t m, std::size_t n, std::size_t r,
                          std::uint64_t trials, std::uint64_t seed,
                          bool zero_gradient) {
  StatReport rep;
  rep.m = m;
  rep.n = n;
  rep.r = r;
  rep.trials = trials;
  rep.seed = seed;
  rep.delta = delta_coefficient(m, n, r);

  rep.target = Matrix(m, n);
  if (!zero_gradient) {
    GaussianStream g(derive_substream(seed, kTargetTag));
    for (auto& x : rep.target.raw()) x = g.next();
  }
  double g_norm2 = 0.0;
  for (double x : rep.target.raw()) g_norm2 += x * x;
  rep.predicted = rep.delta * g_norm2;

  Matrix sum(m, n), sumsq(m, n);
  double sq_err_sum = 0.0;
  Matrix z(m, n);
  const double inv_r = 1.0 / static_cast<double>(r);

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const TrialDraw d = draw_trial(
        m, n, r, derive_substream(derive_seed(seed, trial), kTrialTag));
    double kappa = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t s = 0; s < r; ++s)
          acc += d.tau[s] * d.u(i, s) * d.v(j, s);
        z(i, j) = acc;
        kappa += rep.target(i, j) * acc;
      }
    const double scale = inv_r * kappa;
    for (std::size_t i = 0; i < m * n; ++i) {
      const double est = scale * z.raw()[i];
      sum.raw()[i] += est;
      sumsq.raw()[i] += est * est;
      const double e = est - rep.target.raw()[i];
      sq_err_sum += e * e;
    }
  }

  const double invN = 1.0 / static_cast<double>(trials);
  rep.mean = Matrix(m, n);
  rep.se = Matrix(m, n);
  rep.max_abs_z = 0.0;
  for (std::size_t i = 0; i < m * n; ++i) {
    const double mu = sum.raw()[i] * invN;
    const double var =
        std::max(0.0, sumsq.raw()[i] * invN - mu * mu) /
        static_cast<double>(trials > 1 ? trials - 1 : 1) *
        static_cast<double>(trials);
    // var above is the population variance; SE of the mean:
    const double se = std::sqrt(var * invN);
    rep.mean.raw()[i] = mu;
    rep.se.raw()[i] = se;
    if (se > 0.0) {
      const double zscore = std::abs(mu - rep.target.raw()[i]) / se;
      rep.max_abs_z = std::max(rep.max_abs_z, zscore);
    }
  }
  rep.emp_second_moment = sq_err_sum * invN;
  rep.var_ratio =
      rep.predicted > 0.0 ? rep.emp_second_moment / rep.predicted : 0.0;
  return rep;
}

CrossTermReport cross_term_stats(std::size_t m, std::size_t n, std::size_t r,
                                 std::uint64_t trials, std::uint64_t seed) {
  CrossTermReport rep;
  rep.m = m;
  rep.n = n;
  rep.r = r;
  rep.trials = trials;
  rep.seed = seed;
  rep.mean = Matrix(m, n);
  rep.se = Matrix(m, n);
  if (r == 1) {
    rep.exact_zero = true;
    return rep;
  }

  Matrix sum(m, n), sumsq(m, n);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const TrialDraw d = draw_trial(
        m, n, r, derive_substream(derive_seed(seed, trial), kTrialTag));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        // dense square minus separable term == cross term
        double dense = 0.0, sep = 0.0;
        for (std::size_t s = 0; s < r; ++s) {
          const double term = d.tau[s] * d.u(i, s) * d.v(j, s);
          dense += term;
          sep += term * term;
        }
        const double cross = dense * dense - sep;
        sum(i, j) += cross;
        sumsq(i, j) += cross * cross;
      }
  }

  const double invN = 1.0 / static_cast<double>(trials);
  for (std::size_t i = 0; i < m * n; ++i) {
    const double mu = sum.raw()[i] * invN;
    const double var = std::max(0.0, sumsq.raw()[i] * invN - mu * mu);
    const double se = std::sqrt(var * invN);
    rep.mean.raw()[i] = mu;
    rep.se.raw()[i] = se;
    if (se > 0.0)
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(mu) / se);
  }
  return rep;
}

MomentErrorTrace accumulated_moment_error(std::size_t m, std::size_t n,
                                          std::size_t r, std::uint64_t T,
                                          double beta2, std::uint64_t seed,
                                          double kappa) {
  MomentErrorTrace trace;
  trace.m = m;
  trace.n = n;
  trace.r = r;
  trace.beta2 = beta2;
  trace.seed = seed;
  trace.err_norm.reserve(T);

  // Fixed factors for the whole trace, matching the training setup.
  const FactorSet fs = init_factors({m, n, r, 0}, derive_substream(seed, 0xFAC7));
  Matrix V(m, n), Vhat(m, n);
  const double k2 = kappa * kappa;

  for (std::uint64_t t = 0; t < T; ++t) {
    GaussianStream g(derive_seed(seed, t));
    const auto tau = g.sample(r);
    double err2 = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double dense = 0.0, sep = 0.0;
        for (std::size_t s = 0; s < r; ++s) {
          const double term = tau[s] * fs.u(i, s) * fs.v(j, s);
          dense += term;
          sep += term * term;
        }
        V(i, j) = beta2 * V(i, j) + (1.0 - beta2) * k2 * dense * dense;
        Vhat(i, j) = beta2 * Vhat(i, j) + (1.0 - beta2) * k2 * sep;
        const double e = V(i, j) - Vhat(i, j);
        err2 += e * e;
      }
    trace.err_norm.push_back(std::sqrt(err2) /
                             static_cast<double>(m * n));
  }
  return trace;
}

}  // namespace tezo
