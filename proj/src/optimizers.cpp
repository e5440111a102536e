#include "tezo/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "tezo/rank_select.hpp"

namespace tezo {

namespace {

constexpr std::uint64_t kFactorTag = 0xFAC7;
constexpr std::uint64_t kBatchTag = 0xBA7C;
constexpr std::uint64_t kEvalTag = 0xE7A1;

struct OptimizerChoice {
  PerturbKind kind;
  UpdateRule rule;
};

OptimizerChoice parse_optimizer(const std::string& name) {
  if (name == "tezo") return {PerturbKind::Tezo, UpdateRule::Sgd};
  if (name == "tezo-m") return {PerturbKind::Tezo, UpdateRule::Momentum};
  if (name == "tezo-adam") return {PerturbKind::Tezo, UpdateRule::Adam};
  if (name == "mezo") return {PerturbKind::Dense, UpdateRule::Sgd};
  if (name == "mezo-m") return {PerturbKind::Dense, UpdateRule::Momentum};
  if (name == "mezo-adam") return {PerturbKind::Dense, UpdateRule::Adam};
  if (name == "lozo") return {PerturbKind::Lozo, UpdateRule::Sgd};
  if (name == "subzo") return {PerturbKind::Subzo, UpdateRule::Sgd};
  throw std::invalid_argument("unknown optimizer: " + name);
}

double layer_coef(const OptimizerConfig& cfg, double kappa, std::size_t rank) {
  return cfg.unbiased_scale ? kappa / static_cast<double>(rank) : kappa;
}

}  // namespace

std::size_t OptimizerState::state_floats() const {
  std::size_t n = 0;
  for (const auto& s : factor) n += s.tau_m.size() + s.tau_v.size();
  for (const auto& s : dense2d) n += s.m.size() + s.v.size();
  for (const auto& s : dense1d) n += s.m.size() + s.v.size();
  return n;
}

OptimizerState make_state(const ModelParams& model,
                          const PerturbationScheme& scheme,
                          const OptimizerConfig& cfg) {
  if (cfg.rule != UpdateRule::Sgd &&
      (scheme.kind == PerturbKind::Lozo || scheme.kind == PerturbKind::Subzo))
    throw std::invalid_argument(
        "LOZO/SubZO baselines support only the SGD update rule");
  OptimizerState st;
  st.cfg = cfg;
  if (cfg.rule == UpdateRule::Sgd) return st;
  if (scheme.kind == PerturbKind::Tezo) {
    st.factor.resize(model.mats.size());
    for (std::size_t l = 0; l < model.mats.size(); ++l) {
      const std::size_t r = scheme.factors.at(l).rank();
      st.factor[l].tau_m.assign(r, 0.0);
      if (cfg.rule == UpdateRule::Adam) st.factor[l].tau_v.assign(r, 0.0);
    }
  } else {
    st.dense2d.resize(model.mats.size());
    for (std::size_t l = 0; l < model.mats.size(); ++l) {
      st.dense2d[l].m.assign(model.mats[l].W.size(), 0.0);
      if (cfg.rule == UpdateRule::Adam)
        st.dense2d[l].v.assign(model.mats[l].W.size(), 0.0);
    }
  }
  st.dense1d.resize(model.vecs.size());
  for (std::size_t l = 0; l < model.vecs.size(); ++l) {
    st.dense1d[l].m.assign(model.vecs[l].b.size(), 0.0);
    if (cfg.rule == UpdateRule::Adam)
      st.dense1d[l].v.assign(model.vecs[l].b.size(), 0.0);
  }
  return st;
}

void step_tezo(ModelParams& W, OptimizerState& state,
               const PerturbationScheme& scheme, const ZoEstimate& est) {
  if (!est.finite) {
    ++state.skipped;
    return;
  }
  GaussianStream g(est.seed);
  for (std::size_t l = 0; l < W.mats.size(); ++l) {
    const FactorSet& fs = scheme.factors.at(l);
    const auto tau = g.sample(fs.rank());
    perturb_in_place(W.mats[l].W, fs, tau,
                     -state.cfg.eta * layer_coef(state.cfg, est.kappa, fs.rank()));
  }
  for (auto& p : W.vecs)
    for (auto& x : p.b) x -= state.cfg.eta * est.kappa * g.next();
  ++state.step;
}

void step_tezo_m(ModelParams& W, OptimizerState& state,
                 const PerturbationScheme& scheme, const ZoEstimate& est) {
  if (!est.finite) {
    ++state.skipped;
    return;
  }
  const auto& cfg = state.cfg;
  GaussianStream g(est.seed);
  for (std::size_t l = 0; l < W.mats.size(); ++l) {
    const FactorSet& fs = scheme.factors.at(l);
    const auto tau = g.sample(fs.rank());
    auto& tm = state.factor.at(l).tau_m;
    const double coef = layer_coef(cfg, est.kappa, fs.rank());
    for (std::size_t s = 0; s < fs.rank(); ++s)
      tm[s] = cfg.beta1 * tm[s] + (1.0 - cfg.beta1) * coef * tau[s];
    perturb_in_place(W.mats[l].W, fs, tm, -cfg.eta);
  }
  for (std::size_t l = 0; l < W.vecs.size(); ++l) {
    auto& m = state.dense1d.at(l).m;
    auto& b = W.vecs[l].b;
    for (std::size_t i = 0; i < b.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * est.kappa * g.next();
      b[i] -= cfg.eta * m[i];
    }
  }
  ++state.step;
}

void step_tezo_adam(ModelParams& W, OptimizerState& state,
                    const PerturbationScheme& scheme, const ZoEstimate& est) {
  if (!est.finite) {
    ++state.skipped;
    return;
  }
  const auto& cfg = state.cfg;
  GaussianStream g(est.seed);
  for (std::size_t l = 0; l < W.mats.size(); ++l) {
    const FactorSet& fs = scheme.factors.at(l);
    const auto tau = g.sample(fs.rank());
    auto& fstate = state.factor.at(l);
    const double coef = layer_coef(cfg, est.kappa, fs.rank());
    for (std::size_t s = 0; s < fs.rank(); ++s) {
      fstate.tau_m[s] =
          cfg.beta1 * fstate.tau_m[s] + (1.0 - cfg.beta1) * coef * tau[s];
      fstate.tau_v[s] = cfg.beta2 * fstate.tau_v[s] +
                        (1.0 - cfg.beta2) * coef * coef * tau[s] * tau[s];
    }
    // M and V expanded entrywise, no bias correction, eps inside the root
    Matrix& Wl = W.mats[l].W;
    for (std::size_t i = 0; i < Wl.rows(); ++i)
      for (std::size_t j = 0; j < Wl.cols(); ++j) {
        double mt = 0.0, vt = 0.0;
        for (std::size_t s = 0; s < fs.rank(); ++s) {
          const double uv = fs.u(i, s) * fs.v(j, s);
          mt += fstate.tau_m[s] * uv;
          vt += fstate.tau_v[s] * uv * uv;
        }
        Wl(i, j) -= cfg.eta * mt / std::sqrt(vt + cfg.eps);
      }
  }
  for (std::size_t l = 0; l < W.vecs.size(); ++l) {
    auto& st = state.dense1d.at(l);
    auto& b = W.vecs[l].b;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double z = g.next();
      st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * est.kappa * z;
      st.v[i] =
          cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * est.kappa * est.kappa * z * z;
      b[i] -= cfg.eta * st.m[i] / std::sqrt(st.v[i] + cfg.eps);
    }
  }
  ++state.step;
}

void step_mezo_family(ModelParams& W, OptimizerState& state,
                      const ZoEstimate& est) {
  if (!est.finite) {
    ++state.skipped;
    return;
  }
  const auto& cfg = state.cfg;
  GaussianStream g(est.seed);
  auto update_span = [&](double* w, std::size_t n, DenseState* st) {
    for (std::size_t i = 0; i < n; ++i) {
      const double z = g.next();
      const double grad = est.kappa * z;
      switch (cfg.rule) {
        case UpdateRule::Sgd:
          w[i] -= cfg.eta * grad;
          break;
        case UpdateRule::Momentum:
          st->m[i] = cfg.beta1 * st->m[i] + (1.0 - cfg.beta1) * grad;
          w[i] -= cfg.eta * st->m[i];
          break;
        case UpdateRule::Adam:
          st->m[i] = cfg.beta1 * st->m[i] + (1.0 - cfg.beta1) * grad;
          st->v[i] = cfg.beta2 * st->v[i] + (1.0 - cfg.beta2) * grad * grad;
          w[i] -= cfg.eta * st->m[i] / std::sqrt(st->v[i] + cfg.eps);
          break;
      }
    }
  };
  for (std::size_t l = 0; l < W.mats.size(); ++l)
    update_span(W.mats[l].W.data(), W.mats[l].W.size(),
                cfg.rule == UpdateRule::Sgd ? nullptr : &state.dense2d.at(l));
  for (std::size_t l = 0; l < W.vecs.size(); ++l)
    update_span(W.vecs[l].b.data(), W.vecs[l].b.size(),
                cfg.rule == UpdateRule::Sgd ? nullptr : &state.dense1d.at(l));
  ++state.step;
}

void step_scheme_sgd(ModelParams& W, OptimizerState& state,
                     const PerturbationScheme& scheme, const ZoEstimate& est,
                     std::uint64_t t) {
  if (!est.finite) {
    ++state.skipped;
    return;
  }
  apply_perturbation(W, scheme, -state.cfg.eta * est.kappa, est.seed, t);
  ++state.step;
}

PerturbationScheme build_scheme(const ModelParams& model, const RunSetup& setup) {
  const OptimizerChoice choice = parse_optimizer(setup.optimizer);
  PerturbationScheme scheme;
  scheme.kind = choice.kind;
  scheme.factor_seed = derive_substream(setup.seed, kFactorTag);
  switch (choice.kind) {
    case PerturbKind::Dense:
      break;
    case PerturbKind::Tezo: {
      std::vector<std::size_t> ranks;
      if (setup.rank_auto) {
        RankPolicy policy;
        policy.threshold_frac = setup.rank_threshold;
        policy.r_max = setup.rank_max;
        ranks = select_ranks(model, policy);
      } else {
        ranks.assign(model.mats.size(), setup.rank);
      }
      for (std::size_t l = 0; l < model.mats.size(); ++l) {
        const Matrix& Wl = model.mats[l].W;
        const std::size_t r =
            std::min(ranks[l], std::min(Wl.rows(), Wl.cols()));
        if (!setup.rank_auto && setup.rank > std::min(Wl.rows(), Wl.cols()))
          throw std::invalid_argument("rank exceeds min(m, n) for layer " +
                                      model.mats[l].name);
        scheme.factors.push_back(init_factors(
            {Wl.rows(), Wl.cols(), r, model.mats[l].block},
            derive_substream(scheme.factor_seed, l), model.mats[l].name));
      }
      // Optional factor refresh; 0 keeps the factors for the whole run.
      scheme.interval = setup.lazy_interval;
      break;
    }
    case PerturbKind::Lozo:
    case PerturbKind::Subzo: {
      scheme.rank = setup.rank;
      scheme.interval = setup.lazy_interval != 0
                            ? setup.lazy_interval
                            : (choice.kind == PerturbKind::Lozo ? 100 : 500);
      for (const auto& p : model.mats)
        if (setup.rank > std::min(p.W.rows(), p.W.cols()))
          throw std::invalid_argument("rank exceeds min(m, n) for layer " +
                                      p.name);
      break;
    }
  }
  return scheme;
}

RunReport run(const Objective& objective, ModelParams& model,
              const RunSetup& setup) {
  const auto start = std::chrono::steady_clock::now();
  const OptimizerChoice choice = parse_optimizer(setup.optimizer);
  OptimizerConfig cfg = setup.cfg;
  cfg.rule = choice.rule;

  PerturbationScheme scheme = build_scheme(model, setup);
  OptimizerState state = make_state(model, scheme, cfg);
  ElementCounter counter;
  if (scheme.kind == PerturbKind::Tezo)
    for (const auto& fs : scheme.factors)
      counter.generated += (fs.rows() + fs.cols()) * fs.rank();

  const SeedSchedule schedule{setup.seed};
  const Batch eval_batch =
      objective.sample_batch(derive_substream(setup.seed, kEvalTag));

  RunReport rep;
  rep.initial_loss = objective.eval(model, eval_batch);
  rep.trajectory.push_back({0, rep.initial_loss, counter.generated});
  rep.final_loss = rep.initial_loss;

  for (std::uint64_t t = 0; t < setup.steps; ++t) {
    // Optional TeZO factor refresh: redraw u, v at interval boundaries.
    // Factor-space momentum refers to the old factors, so those
    // accumulators restart from zero at each boundary.
    if (scheme.kind == PerturbKind::Tezo && scheme.interval > 0 && t > 0 &&
        t % scheme.interval == 0) {
      for (std::size_t l = 0; l < scheme.factors.size(); ++l) {
        FactorSet& fs = scheme.factors[l];
        fs = init_factors(
            {fs.rows(), fs.cols(), fs.rank(), model.mats[l].block},
            derive_substream(derive_seed(scheme.factor_seed, t), l),
            model.mats[l].name);
        counter.generated += (fs.rows() + fs.cols()) * fs.rank();
      }
      for (auto& fstate : state.factor) {
        std::fill(fstate.tau_m.begin(), fstate.tau_m.end(), 0.0);
        std::fill(fstate.tau_v.begin(), fstate.tau_v.end(), 0.0);
      }
    }
    const std::uint64_t zeta = schedule.derive(t);
    const Batch batch = objective.sample_batch(derive_substream(zeta, kBatchTag));
    auto bound = [&](const ModelParams& w) { return objective.eval(w, batch); };
    const ZoEstimate est =
        spsa_kappa(bound, model, scheme, cfg.rho, zeta, t, &counter);

    if (choice.kind == PerturbKind::Tezo) {
      switch (cfg.rule) {
        case UpdateRule::Sgd: step_tezo(model, state, scheme, est); break;
        case UpdateRule::Momentum: step_tezo_m(model, state, scheme, est); break;
        case UpdateRule::Adam: step_tezo_adam(model, state, scheme, est); break;
      }
    } else if (choice.kind == PerturbKind::Dense) {
      step_mezo_family(model, state, est);
    } else {
      step_scheme_sgd(model, state, scheme, est, t);
    }

    const bool at_record =
        setup.record_every != 0 && (t + 1) % setup.record_every == 0;
    if (at_record || t + 1 == setup.steps) {
      const double loss = objective.eval(model, eval_batch);
      rep.trajectory.push_back({t + 1, loss, counter.generated});
      rep.final_loss = loss;
      rep.steps_run = t + 1;
      if (!std::isfinite(loss) ||
          loss > setup.divergence_factor * std::max(std::abs(rep.initial_loss), 1e-300)) {
        rep.termination = "diverged";
        break;
      }
    }
  }
  rep.steps_run = state.step + state.skipped;
  rep.skipped_steps = state.skipped;
  rep.elements_generated = counter.generated;
  rep.state_floats = state.state_floats();
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return rep;
}

}  // namespace tezo
