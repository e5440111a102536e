#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tezo/config.hpp"
#include "tezo/estimators.hpp"
#include "tezo/lowrank.hpp"
#include "tezo/objectives.hpp"
#include "tezo/optimizers.hpp"
#include "tezo/rank_select.hpp"
#include "tezo/report.hpp"
#include "tezo/verify.hpp"

namespace {

// Exit codes: 0 ok, 1 validation/usage, 2 I/O, 3 divergence abort.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitDiverged = 3;

tezo::RunSetup setup_from_config(const tezo::RunConfig& cfg) {
  tezo::RunSetup s;
  s.optimizer = cfg.optimizer;
  s.cfg.eta = cfg.eta;
  s.cfg.rho = cfg.rho;
  s.cfg.beta1 = cfg.beta1;
  s.cfg.beta2 = cfg.beta2;
  s.cfg.eps = cfg.eps;
  s.cfg.unbiased_scale = cfg.unbiased_scale;
  s.steps = cfg.steps;
  s.seed = cfg.seed;
  s.record_every = cfg.record_every;
  s.rank = cfg.rank;
  s.rank_auto = cfg.rank_auto;
  s.rank_threshold = cfg.rank_threshold;
  s.rank_max = cfg.rank_max;
  s.lazy_interval = cfg.lazy_interval;
  return s;
}

int run_train(tezo::RunConfig cfg, unsigned sweep) {
  cfg.validate();
  int worst = kExitOk;
  for (unsigned k = 0; k < std::max(1u, sweep); ++k) {
    tezo::RunConfig run_cfg = cfg;
    std::string out = cfg.out;
    if (sweep > 1) {
      run_cfg.seed = tezo::derive_substream(cfg.seed, k);
      if (!out.empty()) out += "." + std::to_string(k);
    }
    const auto objective = tezo::make_objective(run_cfg.objective);
    tezo::ModelParams model =
        objective->init_params(tezo::derive_substream(run_cfg.seed, 0x1717));
    tezo::RunSetup setup = setup_from_config(run_cfg);
    const tezo::RunReport rep = tezo::run(*objective, model, setup);
    std::cerr << "run seed=" << run_cfg.seed << " steps=" << rep.steps_run
              << " final_loss=" << rep.final_loss << " wall_ms=" << rep.wall_ms
              << "\n";
    tezo::emit_table(tezo::run_report_table(run_cfg, rep), run_cfg.format, out);
    if (rep.termination == "diverged") worst = kExitDiverged;
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TeZO low-rank zeroth-order optimization benchmark"};
  app.require_subcommand(1);
  // Let --out / --format / --seed appear after the subcommand name too.
  app.fallthrough();

  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 42;
  app.add_option("--out", out, "output path (default stdout)");
  app.add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "base random seed");

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "run one ZO training experiment");
  std::string config_path;
  tezo::RunConfig flag_cfg;
  unsigned sweep = 1;
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--optimizer", flag_cfg.optimizer,
                    "tezo|tezo-m|tezo-adam|mezo|mezo-m|mezo-adam|lozo|subzo");
  train->add_option("--objective", flag_cfg.objective,
                    "quad<d>|quad<m>x<n>|cubic<d>|mlp:<d0-d1-...>");
  train->add_option("--steps", flag_cfg.steps, "iterations T");
  train->add_option("--eta", flag_cfg.eta, "learning rate");
  train->add_option("--rho", flag_cfg.rho, "perturbation rate");
  train->add_option("--beta1", flag_cfg.beta1, "momentum coefficient");
  train->add_option("--beta2", flag_cfg.beta2, "second-moment coefficient");
  train->add_option("--eps", flag_cfg.eps, "Adam smoothing term");
  train->add_option("--rank", flag_cfg.rank, "fixed perturbation rank");
  train->add_flag("--rank-auto", flag_cfg.rank_auto,
                  "select per-layer ranks from weight spectra");
  train->add_option("--rank-threshold", flag_cfg.rank_threshold,
                    "fraction of sigma_1 for rank selection");
  train->add_option("--rank-max", flag_cfg.rank_max, "rank cap");
  train->add_option("--lazy-interval", flag_cfg.lazy_interval,
                    "LOZO/SubZO factor redraw interval (0 = default)");
  train->add_flag("--unbiased-scale", flag_cfg.unbiased_scale,
                  "apply the 1/r unbiased scaling to updates");
  train->add_option("--record-every", flag_cfg.record_every,
                    "loss recording interval");
  train->add_option("--sweep", sweep, "number of derived-seed runs");

  // stats ------------------------------------------------------------------
  auto* stats = app.add_subcommand(
      "stats", "Monte Carlo mean/variance check of the low-rank estimator");
  std::size_t s_m = 4, s_n = 4, s_r = 2;
  std::uint64_t s_trials = 100000;
  double s_rho = 1e-3;
  stats->add_option("--m", s_m);
  stats->add_option("--n", s_n);
  stats->add_option("--r", s_r);
  stats->add_option("--trials", s_trials);
  stats->add_option("--rho", s_rho,
                    "echoed only; the quadratic target makes kappa exact");

  // cross ------------------------------------------------------------------
  auto* cross = app.add_subcommand(
      "cross", "Monte Carlo check that the second-moment cross term is zero-mean");
  std::size_t c_m = 16, c_n = 16, c_r = 4;
  std::uint64_t c_trials = 100000;
  cross->add_option("--m", c_m);
  cross->add_option("--n", c_n);
  cross->add_option("--r", c_r);
  cross->add_option("--trials", c_trials);

  // moment-error -----------------------------------------------------------
  auto* moment = app.add_subcommand(
      "moment-error", "accumulated dense-vs-separable second-moment error");
  std::vector<std::size_t> me_sizes{32, 128};
  std::size_t me_r = 8;
  std::uint64_t me_T = 1000;
  double me_beta2 = 0.99;
  unsigned me_seeds = 5;
  double me_kappa = 1.0;
  moment->add_option("--sizes", me_sizes, "square sizes m = n")
      ->delimiter(',');
  moment->add_option("--r", me_r);
  moment->add_option("--T", me_T);
  moment->add_option("--beta2", me_beta2);
  moment->add_option("--seeds", me_seeds, "number of derived seeds");
  moment->add_option("--kappa", me_kappa, "fixed projected coefficient");

  // count ------------------------------------------------------------------
  auto* count = app.add_subcommand("count", "Table-style element accounting");
  std::string ct_method = "tezo";
  std::uint64_t ct_m = 1024, ct_n = 1024, ct_r = 8, ct_T = 1000;
  count->add_option("--method", ct_method, "mezo|subzo|lozo|tezo");
  count->add_option("--m", ct_m);
  count->add_option("--n", ct_n);
  count->add_option("--r", ct_r);
  count->add_option("--T", ct_T);

  // rank -------------------------------------------------------------------
  auto* rank = app.add_subcommand("rank", "layer-wise rank selection report");
  std::string rk_model;
  double rk_threshold = 0.25;
  std::size_t rk_rmax = 64;
  bool rk_energy = false;
  rank->add_option("--model-file", rk_model, "model JSON file")->required();
  rank->add_option("--threshold", rk_threshold);
  rank->add_option("--rmax", rk_rmax);
  rank->add_flag("--cumulative-energy", rk_energy,
                 "use the cumulative-energy criterion instead");

  // spectrum ---------------------------------------------------------------
  auto* spectrum = app.add_subcommand(
      "spectrum", "oracle-gradient singular spectra and cosine matrix");
  std::string sp_net = "mlp:8-16-2";
  std::size_t sp_steps = 20, sp_topk = 8;
  double sp_eta = 0.05;
  spectrum->add_option("--net-spec", sp_net);
  spectrum->add_option("--steps", sp_steps);
  spectrum->add_option("--topk", sp_topk);
  spectrum->add_option("--eta", sp_eta);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      tezo::RunConfig cfg;
      if (!config_path.empty()) cfg = tezo::parse_config_file(config_path);
      // flags override file values
      auto override_if = [&](const char* flag, auto member) {
        if (train->count(flag)) cfg.*member = flag_cfg.*member;
      };
      override_if("--optimizer", &tezo::RunConfig::optimizer);
      override_if("--objective", &tezo::RunConfig::objective);
      override_if("--steps", &tezo::RunConfig::steps);
      override_if("--eta", &tezo::RunConfig::eta);
      override_if("--rho", &tezo::RunConfig::rho);
      override_if("--beta1", &tezo::RunConfig::beta1);
      override_if("--beta2", &tezo::RunConfig::beta2);
      override_if("--eps", &tezo::RunConfig::eps);
      override_if("--rank", &tezo::RunConfig::rank);
      override_if("--rank-auto", &tezo::RunConfig::rank_auto);
      override_if("--rank-threshold", &tezo::RunConfig::rank_threshold);
      override_if("--rank-max", &tezo::RunConfig::rank_max);
      override_if("--lazy-interval", &tezo::RunConfig::lazy_interval);
      override_if("--unbiased-scale", &tezo::RunConfig::unbiased_scale);
      override_if("--record-every", &tezo::RunConfig::record_every);
      if (app.count("--seed")) cfg.seed = seed;
      if (app.count("--out")) cfg.out = out;
      if (app.count("--format")) cfg.format = format;
      return run_train(cfg, sweep);
    }

    if (*stats) {
      const tezo::StatReport rep =
          tezo::theorem1_check(s_m, s_n, s_r, s_trials, seed);
      tezo::Table t;
      t.meta = {{"m", std::to_string(s_m)},
                {"n", std::to_string(s_n)},
                {"r", std::to_string(s_r)},
                {"trials", std::to_string(s_trials)},
                {"rho", tezo::format_double(s_rho)},
                {"seed", std::to_string(seed)},
                {"delta", tezo::format_double(rep.delta)},
                {"emp_second_moment", tezo::format_double(rep.emp_second_moment)},
                {"delta_pred", tezo::format_double(rep.predicted)},
                {"emp_var_ratio", tezo::format_double(rep.var_ratio)},
                {"max_abs_z", tezo::format_double(rep.max_abs_z)}};
      t.header = {"row", "col", "entry_bias", "se", "emp_var_ratio", "delta_pred"};
      for (std::size_t i = 0; i < s_m; ++i)
        for (std::size_t j = 0; j < s_n; ++j)
          t.rows.push_back({std::to_string(i), std::to_string(j),
                            tezo::format_double(rep.mean(i, j) - rep.target(i, j)),
                            tezo::format_double(rep.se(i, j)),
                            tezo::format_double(rep.var_ratio),
                            tezo::format_double(rep.predicted)});
      tezo::emit_table(t, format, out);
      return kExitOk;
    }

    if (*cross) {
      const tezo::CrossTermReport rep =
          tezo::cross_term_stats(c_m, c_n, c_r, c_trials, seed);
      tezo::Table t;
      t.meta = {{"m", std::to_string(c_m)},
                {"n", std::to_string(c_n)},
                {"r", std::to_string(c_r)},
                {"trials", std::to_string(c_trials)},
                {"seed", std::to_string(seed)},
                {"exact_zero", rep.exact_zero ? "true" : "false"},
                {"max_abs_z", tezo::format_double(rep.max_abs_z)}};
      t.header = {"row", "col", "mean", "se"};
      for (std::size_t i = 0; i < c_m; ++i)
        for (std::size_t j = 0; j < c_n; ++j)
          t.rows.push_back({std::to_string(i), std::to_string(j),
                            tezo::format_double(rep.mean(i, j)),
                            tezo::format_double(rep.se(i, j))});
      tezo::emit_table(t, format, out);
      return kExitOk;
    }

    if (*moment) {
      tezo::Table t;
      t.meta = {{"r", std::to_string(me_r)},
                {"T", std::to_string(me_T)},
                {"beta2", tezo::format_double(me_beta2)},
                {"kappa", tezo::format_double(me_kappa)},
                {"seed", std::to_string(seed)}};
      t.header = {"m", "n", "seed_index", "step", "err_norm"};
      for (std::size_t size : me_sizes)
        for (unsigned k = 0; k < me_seeds; ++k) {
          const auto trace = tezo::accumulated_moment_error(
              size, size, me_r, me_T, me_beta2,
              tezo::derive_substream(seed, k), me_kappa);
          for (std::size_t step = 0; step < trace.err_norm.size(); ++step)
            t.rows.push_back({std::to_string(size), std::to_string(size),
                              std::to_string(k), std::to_string(step + 1),
                              tezo::format_double(trace.err_norm[step])});
        }
      tezo::emit_table(t, format, out);
      return kExitOk;
    }

    if (*count) {
      tezo::CostModel cm;
      cm.method = tezo::cost_method_from_name(ct_method);
      cm.m = ct_m;
      cm.n = ct_n;
      cm.r = ct_r;
      cm.T = ct_T;
      tezo::Table t;
      t.header = {"method", "m", "n", "r", "T", "total_elements"};
      t.rows.push_back({ct_method, std::to_string(ct_m), std::to_string(ct_n),
                        std::to_string(ct_r), std::to_string(ct_T),
                        std::to_string(tezo::count_elements(cm))});
      tezo::emit_table(t, format, out);
      return kExitOk;
    }

    if (*rank) {
      const tezo::ModelParams model = tezo::load_model_json(rk_model);
      tezo::RankPolicy policy;
      policy.threshold_frac = rk_threshold;
      policy.r_max = rk_rmax;
      policy.cumulative_energy = rk_energy;
      const auto selected = tezo::select_ranks(model, policy);
      tezo::Table t;
      t.meta = {{"threshold", tezo::format_double(rk_threshold)},
                {"rmax", std::to_string(rk_rmax)}};
      if (rk_energy) t.meta.push_back({"criterion", "cumulative_energy"});
      t.header = {"layer", "block", "sigma1", "rank_raw", "rank_selected"};
      for (std::size_t l = 0; l < model.mats.size(); ++l) {
        const auto sigma = tezo::singular_values(model.mats[l].W, 1);
        t.rows.push_back(
            {model.mats[l].name, std::to_string(model.mats[l].block),
             tezo::format_double(sigma.empty() ? 0.0 : sigma[0]),
             std::to_string(tezo::matrix_rank(model.mats[l].W, policy)),
             std::to_string(selected[l])});
      }
      tezo::emit_table(t, format, out);
      return kExitOk;
    }

    if (*spectrum) {
      const auto obj = tezo::make_objective(sp_net);
      const tezo::SpectrumReport rep =
          tezo::gradient_spectrum(*obj, seed, sp_steps, sp_topk, sp_eta);
      tezo::Table spectra;
      spectra.meta = {{"net", sp_net},
                      {"steps", std::to_string(sp_steps)},
                      {"topk", std::to_string(sp_topk)},
                      {"seed", std::to_string(seed)}};
      spectra.header = {"step", "layer", "index", "sigma"};
      for (std::size_t t = 0; t < rep.spectra.size(); ++t)
        for (std::size_t l = 0; l < rep.spectra[t].size(); ++l)
          for (std::size_t i = 0; i < rep.spectra[t][l].size(); ++i)
            spectra.rows.push_back({std::to_string(t), std::to_string(l),
                                    std::to_string(i),
                                    tezo::format_double(rep.spectra[t][l][i])});
      tezo::Table cosine;
      cosine.meta = spectra.meta;
      cosine.header = {"layer", "t1", "t2", "cosine", "defined"};
      for (std::size_t l = 0; l < rep.cosine.size(); ++l)
        for (std::size_t t1 = 0; t1 < rep.cosine[l].rows(); ++t1)
          for (std::size_t t2 = 0; t2 < rep.cosine[l].cols(); ++t2) {
            const bool ok =
                !rep.undefined_row[l][t1] && !rep.undefined_row[l][t2];
            cosine.rows.push_back({std::to_string(l), std::to_string(t1),
                                   std::to_string(t2),
                                   tezo::format_double(rep.cosine[l](t1, t2)),
                                   ok ? "1" : "0"});
          }
      if (out.empty() || out == "-") {
        tezo::emit_table(spectra, format, "-");
        tezo::emit_table(cosine, format, "-");
      } else {
        tezo::emit_table(spectra, format, out + ".spectra." + format);
        tezo::emit_table(cosine, format, out + ".cosine." + format);
      }
      return kExitOk;
    }
  } catch (const tezo::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
