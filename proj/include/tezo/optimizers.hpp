#ifndef TEZO_OPTIMIZERS_HPP
#define TEZO_OPTIMIZERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tezo/estimators.hpp"
#include "tezo/objectives.hpp"

namespace tezo {

enum class UpdateRule { Sgd, Momentum, Adam };

struct OptimizerConfig {
  UpdateRule rule = UpdateRule::Sgd;
  double eta = 1e-3;
  double rho = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-5;
  bool unbiased_scale = false;  // apply the Theorem-style 1/r factor
};

// Factor-space state of one 2-D layer under the TeZO variants: O(r_l)
// floats, independent of m*n. Dense states are full buffers, used for the
// MeZO variants and for every 1-D parameter.
struct FactorState {
  std::vector<double> tau_m;
  std::vector<double> tau_v;
};

struct DenseState {
  std::vector<double> m;
  std::vector<double> v;
};

struct OptimizerState {
  OptimizerConfig cfg;
  std::uint64_t step = 0;
  std::uint64_t skipped = 0;  // non-finite estimates
  std::vector<FactorState> factor;  // aligned with model.mats (TeZO)
  std::vector<DenseState> dense2d;  // aligned with model.mats (MeZO)
  std::vector<DenseState> dense1d;  // aligned with model.vecs

  // Accounting hook: momentum/second-moment floats currently held.
  std::size_t state_floats() const;
};

OptimizerState make_state(const ModelParams& model,
                          const PerturbationScheme& scheme,
                          const OptimizerConfig& cfg);

// One update per Algorithm-1 variant; the estimate must come from the
// same iteration's seed so the stream replay reproduces the tau / z used
// by the perturbations. Non-finite estimates skip the update and count.
void step_tezo(ModelParams& W, OptimizerState& state,
               const PerturbationScheme& scheme, const ZoEstimate& est);
void step_tezo_m(ModelParams& W, OptimizerState& state,
                 const PerturbationScheme& scheme, const ZoEstimate& est);
void step_tezo_adam(ModelParams& W, OptimizerState& state,
                    const PerturbationScheme& scheme, const ZoEstimate& est);
void step_mezo_family(ModelParams& W, OptimizerState& state,
                      const ZoEstimate& est);
// Plain SGD update replaying the scheme's perturbation (used by the
// LOZO/SubZO baselines, and equal to step_tezo for the TeZO scheme).
void step_scheme_sgd(ModelParams& W, OptimizerState& state,
                     const PerturbationScheme& scheme, const ZoEstimate& est,
                     std::uint64_t t);

struct RunRecord {
  std::uint64_t step = 0;
  double loss = 0.0;
  std::uint64_t elements_generated = 0;
};

struct RunReport {
  std::vector<RunRecord> trajectory;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::uint64_t steps_run = 0;
  std::uint64_t skipped_steps = 0;
  std::uint64_t elements_generated = 0;
  std::size_t state_floats = 0;
  double wall_ms = 0.0;
  std::string termination = "completed";  // or "diverged"
};

struct RunSetup {
  std::string optimizer = "tezo";  // tezo|tezo-m|tezo-adam|mezo|mezo-m|mezo-adam|lozo|subzo
  OptimizerConfig cfg;
  std::uint64_t steps = 0;
  std::uint64_t seed = 42;
  std::uint64_t record_every = 100;
  // Rank configuration for the low-rank schemes.
  std::size_t rank = 4;
  bool rank_auto = false;
  double rank_threshold = 0.25;
  std::size_t rank_max = 64;
  std::size_t lazy_interval = 0;  // 0 = scheme default (LOZO 100, SubZO 500)
  double divergence_factor = 1e6;
};

PerturbationScheme build_scheme(const ModelParams& model, const RunSetup& setup);

// Algorithm-1 outer loop: T iterations of estimate + update, loss recorded
// every record_every steps, deterministic given the seed.
RunReport run(const Objective& objective, ModelParams& model, const RunSetup& setup);

}  // namespace tezo

#endif  // TEZO_OPTIMIZERS_HPP
