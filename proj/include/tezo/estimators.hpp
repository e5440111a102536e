#ifndef TEZO_ESTIMATORS_HPP
#define TEZO_ESTIMATORS_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "tezo/lowrank.hpp"
#include "tezo/model.hpp"

namespace tezo {

enum class PerturbKind { Dense, Lozo, Subzo, Tezo };

// Counts freshly generated Gaussian elements. Replayed passes (the -2rho
// and restore perturbations, the update resampling) do not count: the
// whole point of seed replay is that those elements are regenerated, not
// newly sampled.
struct ElementCounter {
  std::uint64_t generated = 0;
};

// How perturbations Z are produced for every 2-D parameter. 1-D
// parameters are always perturbed densely (MeZO style) from the same
// per-iteration stream, whatever the 2-D scheme.
//
// TeZO: fixed per-layer factor sets (index-aligned with model.mats), only
// the temporal coefficients tau are drawn per step.
// LOZO: Z = U V^T; U redrawn every `interval` steps, V redrawn per step.
// SubZO: Z = U S V^T; U, V redrawn every `interval` steps, S (r x r)
// drawn per step.
struct PerturbationScheme {
  PerturbKind kind = PerturbKind::Dense;
  std::vector<FactorSet> factors;  // TeZO only
  std::size_t rank = 0;            // LOZO/SubZO
  std::size_t interval = 1;        // LOZO/SubZO lazy redraw interval
  std::uint64_t factor_seed = 0;   // keys LOZO/SubZO lazy factors and TeZO init
};

// One pass of Algorithm-style in-place perturbation: W += scale * Z for
// every parameter, with all per-step randomness replayed from `zeta`.
// Pass `counter` only on the first of the replayed passes per iteration.
void apply_perturbation(ModelParams& W, const PerturbationScheme& scheme,
                        double scale, std::uint64_t zeta, std::uint64_t t,
                        ElementCounter* counter = nullptr);

struct ZoEstimate {
  double kappa = 0.0;
  std::uint64_t seed = 0;  // the zeta_t that regenerates Z
  double rho = 0.0;
  bool finite = true;
  double f_plus = 0.0;
  double f_minus = 0.0;
};

// Three-perturbation SPSA sequence (+rho, -2rho, +rho) on W in place with
// a fixed minibatch baked into `objective`; returns
// kappa = (f_+ - f_-) / (2 rho). If either evaluation is non-finite the
// estimate is flagged and W is still restored.
ZoEstimate spsa_kappa(const std::function<double(const ModelParams&)>& objective,
                      ModelParams& W, const PerturbationScheme& scheme,
                      double rho, std::uint64_t zeta, std::uint64_t t,
                      ElementCounter* counter = nullptr);

// Materialized single-layer ZO gradient kappa * Z (verification path).
// With unbiased_scale the Theorem-style (1/r) factor is applied.
Matrix zo_gradient(const ZoEstimate& est, const FactorSet& fs,
                   bool unbiased_scale = false);

// Variance coefficient of the low-rank estimator:
// delta = 1 + mn + 2mn/r + 6(m+n)/r + 10/r.
double delta_coefficient(std::uint64_t m, std::uint64_t n, std::uint64_t r);

// Perturbation-bias coefficient used only for reporting:
// delta_rho = (15 r^2 (m+3)^3 (n+3)^3 + 36 r^3 m^3 n^3 + r^4 m^3 n^3) / 4.
// Computed in floating point; overflows to inf rather than throwing.
double delta_rho_coefficient(std::uint64_t m, std::uint64_t n, std::uint64_t r);

// Materialized baseline perturbation at step t (tests and verification).
Matrix baseline_perturbation(PerturbKind kind, std::size_t m, std::size_t n,
                             std::size_t rank, std::size_t interval,
                             std::uint64_t factor_seed, std::uint64_t zeta,
                             std::uint64_t t);

}  // namespace tezo

#endif  // TEZO_ESTIMATORS_HPP
