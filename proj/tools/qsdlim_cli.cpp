#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsdlim/csv.hpp"
#include "qsdlim/errors.hpp"
#include "qsdlim/estimate.hpp"
#include "qsdlim/harness.hpp"
#include "qsdlim/moments.hpp"
#include "qsdlim/qsd.hpp"
#include "qsdlim/sde.hpp"

using namespace qsdlim;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

// Raised for failures that are not the caller's fault.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw DomainError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open input file '" + path + "'");
  return in;
}

struct ParamFlags {
  double omega_h = 0.0;
  double beta_h = 0.0;
  double alpha_h = 0.0;
  std::string f = "normal";
  std::string g = "normal";
  double h = 1.0;
  std::string fit_file;
  std::optional<double> sigma2_0;
};

void add_param_flags(CLI::App* cmd, ParamFlags& p, bool allow_fit_file) {
  cmd->add_option("--omega-h", p.omega_h, "Intercept of the variance update");
  cmd->add_option("--beta-h", p.beta_h, "Persistence of the variance update");
  cmd->add_option("--alpha-h", p.alpha_h, "Score loading of the variance update");
  cmd->add_option("--f", p.f, "Innovation distribution: normal, t:<v>, st:<v>:<skew>");
  cmd->add_option("--g", p.g, "Score distribution: normal, t:<v>, st:<v>:<skew>");
  cmd->add_option("--h", p.h, "Observation interval in years");
  if (allow_fit_file)
    cmd->add_option("--fit", p.fit_file, "Fit record written by the fit subcommand");
}

std::string record_value(const Record& r, const std::string& key) {
  for (const auto& [k, v] : r)
    if (k == key) return v;
  throw DomainError("fit record has no '" + key + "' field");
}

// Parameters from --fit if given, otherwise from the explicit flags.
QsdParams resolve_params(const ParamFlags& flags, double* sigma2_0 = nullptr) {
  QsdParams p;
  if (!flags.fit_file.empty()) {
    auto in = open_input(flags.fit_file);
    const auto rows = read_record_csv(in);
    if (rows.size() != 1) throw DomainError("fit record must hold exactly one row");
    const auto& r = rows[0];
    p.omega_h = parse_double(record_value(r, "omega_h"));
    p.beta_h = parse_double(record_value(r, "beta_h"));
    p.alpha_h = parse_double(record_value(r, "alpha_h"));
    p.f_spec = DistSpec::parse(record_value(r, "f"));
    p.g_spec = DistSpec::parse(record_value(r, "g"));
    p.h = parse_double(record_value(r, "h"));
    if (sigma2_0) *sigma2_0 = parse_double(record_value(r, "sigma2_0"));
  } else {
    p.omega_h = flags.omega_h;
    p.beta_h = flags.beta_h;
    p.alpha_h = flags.alpha_h;
    p.f_spec = DistSpec::parse(flags.f);
    p.g_spec = DistSpec::parse(flags.g);
    p.h = flags.h;
  }
  if (flags.sigma2_0 && sigma2_0) *sigma2_0 = *flags.sigma2_0;
  p.f_spec.validate();
  p.g_spec.validate();
  if (!(p.h > 0.0)) throw DomainError("--h must be positive");
  return p;
}

Record fit_record(const FitResult& fit) {
  const auto& p = fit.params;
  return {{"model", std::string(to_string(fit.model))},
          {"h", format_double(p.h)},
          {"omega_h", format_double(p.omega_h)},
          {"beta_h", format_double(p.beta_h)},
          {"alpha_h", format_double(p.alpha_h)},
          {"f", p.f_spec.to_string()},
          {"g", p.g_spec.to_string()},
          {"sigma2_0", format_double(fit.sigma2_0)},
          {"loglik", format_double(fit.loglik)},
          {"converged", fit.converged ? "1" : "0"},
          {"tolerance_reached", fit.tolerance_reached ? "1" : "0"},
          {"n_iters", std::to_string(fit.n_iters)},
          {"n_restarts_used", std::to_string(fit.n_restarts_used)}};
}

Record recovery_record(const RecoveryResult& r) {
  const auto& d = r.diffusion;
  return {{"omega", format_double(d.omega)},       {"theta", format_double(d.theta)},
          {"kappa", format_double(d.kappa)},       {"rho", format_double(d.rho)},
          {"alpha", format_double(r.alpha)},       {"theta_raw", format_double(r.theta_raw)},
          {"theta_drift", format_double(r.theta_drift)}, {"valid", r.valid ? "1" : "0"},
          {"eta", format_double(r.moments.eta)},   {"mu", format_double(r.moments.mu)},
          {"m2", format_double(r.moments.m2)},     {"rho_int", format_double(r.moments.rho_int)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi score-driven volatility models and their diffusion limits"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  std::string output;

  // moments
  auto* moments = app.add_subcommand("moments", "Limit moment functionals for a pair (f, g)");
  std::string m_f, m_g;
  double m_tol = 1e-9;
  moments->add_option("--f", m_f, "Innovation distribution")->required();
  moments->add_option("--g", m_g, "Score distribution")->required();
  moments->add_option("--tol", m_tol, "Absolute quadrature tolerance");
  moments->add_option("--output,-o", output, "Output file (default stdout)");

  // simulate-sde
  auto* sim_sde = app.add_subcommand("simulate-sde", "Euler path of the variance diffusion");
  DiffusionParams dp;
  double sde_dt = 1.0 / 19656.0;
  std::size_t sde_steps = 19656, sde_stride = 1;
  std::uint64_t sde_seed = 1;
  std::optional<double> sde_s0;
  sim_sde->add_option("--omega", dp.omega)->required();
  sim_sde->add_option("--theta", dp.theta)->required();
  sim_sde->add_option("--kappa", dp.kappa)->required();
  sim_sde->add_option("--rho", dp.rho)->required();
  sim_sde->add_option("--dt", sde_dt, "Euler step in years");
  sim_sde->add_option("--steps", sde_steps, "Number of observations written");
  sim_sde->add_option("--stride", sde_stride, "Euler steps per observation");
  sim_sde->add_option("--seed", sde_seed);
  sim_sde->add_option("--sigma2-0", sde_s0, "Initial variance (default omega / theta)");
  sim_sde->add_option("--output,-o", output);

  // simulate-qsd
  auto* sim_qsd = app.add_subcommand("simulate-qsd", "Path of the discrete QSD model");
  ParamFlags sq;
  std::size_t sq_steps = 1000;
  std::uint64_t sq_seed = 1;
  double sq_s0 = 1.0;
  add_param_flags(sim_qsd, sq, false);
  sim_qsd->add_option("--steps", sq_steps);
  sim_qsd->add_option("--seed", sq_seed);
  sim_qsd->add_option("--sigma2-0", sq_s0, "Initial variance");
  sim_qsd->add_option("--output,-o", output);

  // fit
  auto* fit = app.add_subcommand("fit", "Maximum likelihood fit of one model");
  std::string fit_model, fit_input;
  double fit_h = 0.0;
  std::uint64_t fit_seed = 1;
  FitOptions fit_opts;
  fit->add_option("--model", fit_model, "garch, t-garch, beta-t, beta-normal, beta-st, qsd-t, qsd-st")
      ->required();
  fit->add_option("--input,-i", fit_input, "Returns CSV")->required();
  fit->add_option("--h", fit_h, "Observation interval in years")->required();
  fit->add_option("--seed", fit_seed);
  fit->add_option("--starts", fit_opts.n_starts, "Number of optimizer starts");
  fit->add_option("--output,-o", output);

  // filter
  auto* filt = app.add_subcommand("filter", "Filtered variance path for given parameters");
  ParamFlags fp;
  std::string filt_input;
  add_param_flags(filt, fp, true);
  filt->add_option("--sigma2-0", fp.sigma2_0, "Initial variance (default from --fit or data)");
  filt->add_option("--input,-i", filt_input, "Returns CSV")->required();
  filt->add_option("--output,-o", output);

  // recover
  auto* rec = app.add_subcommand("recover", "Diffusion parameters implied by a fit");
  ParamFlags rp;
  add_param_flags(rec, rp, true);
  rec->add_option("--output,-o", output);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo recovery experiment");
  std::string exp_config;
  std::optional<std::size_t> exp_paths, exp_workers, exp_nobs, exp_starts;
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::string> exp_outdir;
  std::vector<std::size_t> exp_strides;
  std::vector<std::string> exp_models;
  bool exp_verbose = false;
  exp->add_option("--config,-c", exp_config, "JSON config file");
  exp->add_option("--n-paths", exp_paths);
  exp->add_option("--strides", exp_strides);
  exp->add_option("--models", exp_models);
  exp->add_option("--seed", exp_seed);
  exp->add_option("--output-dir", exp_outdir);
  exp->add_option("--workers", exp_workers);
  exp->add_option("--n-obs", exp_nobs);
  exp->add_option("--starts", exp_starts);
  exp->add_flag("--verbose", exp_verbose);

  // figures
  auto* figs = app.add_subcommand("figures", "Moment grids behind the figures");
  std::string fig_which;
  FigureGrid grid;
  figs->add_option("--which", fig_which, "fig1, fig2 or fig3")->required();
  figs->add_option("--v-min", grid.v_min);
  figs->add_option("--v-max", grid.v_max);
  figs->add_option("--v-count", grid.v_count);
  figs->add_option("--skew-min", grid.skew_min);
  figs->add_option("--skew-max", grid.skew_max);
  figs->add_option("--skew-count", grid.skew_count);
  figs->add_option("--output,-o", output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*moments) {
      const auto f = DistSpec::parse(m_f);
      const auto g = DistSpec::parse(m_g);
      f.validate();
      g.validate();
      MomentSet ms;
      try {
        ms = compute_moments(f, g, m_tol);
      } catch (const QuadratureError& e) {
        throw NumericalFailure(e.what());
      }
      const auto v = check_limit_conditions(ms);
      Output out(output);
      write_record_csv(out.stream(), {{{"eta", format_double(ms.eta)},
                                       {"mu", format_double(ms.mu)},
                                       {"m2", format_double(ms.m2)},
                                       {"rho_int", format_double(ms.rho_int)},
                                       {"corr", format_double(ms.corr)},
                                       {"vol_of_vol_unit", format_double(ms.vol_of_vol_unit)},
                                       {"valid", v.valid ? "1" : "0"},
                                       {"margin", format_double(v.margin)}}});
    } else if (*sim_sde) {
      const double s0 = sde_s0 ? *sde_s0 : dp.omega / dp.theta;
      if (!(s0 > 0.0) || !std::isfinite(s0))
        throw DomainError("--sigma2-0 is required when omega / theta is not positive");
      auto rng = RandomStream(sde_seed);
      const auto path = simulate_diffusion_observed(dp, sde_dt, sde_stride, sde_steps, s0, rng);
      Output out(output);
      write_path_csv(out.stream(), path);
    } else if (*sim_qsd) {
      const auto p = resolve_params(sq);
      auto rng = RandomStream(sq_seed);
      const auto path = simulate_qsd(p, sq_steps, sq_s0, rng);
      Output out(output);
      write_path_csv(out.stream(), path);
    } else if (*fit) {
      auto in = open_input(fit_input);
      const auto returns = read_returns_csv(in);
      const auto result = fit_mle(parse_model(fit_model), returns, fit_h, fit_seed, fit_opts);
      if (!result.converged) throw NumericalFailure("fit did not converge: " + result.diagnostics);
      Output out(output);
      write_record_csv(out.stream(), {fit_record(result)});
    } else if (*filt) {
      double s0 = 0.0;
      const auto p = resolve_params(fp, &s0);
      auto in = open_input(filt_input);
      const auto returns = read_returns_csv(in);
      if (!(s0 > 0.0)) s0 = initial_variance(returns, p.h);
      const auto fv = filter(p, returns, s0);
      Output out(output);
      out.stream() << "k,sigma2\n";
      for (std::size_t k = 0; k < fv.sigma2.size(); ++k)
        out.stream() << k << ',' << format_double(fv.sigma2[k]) << '\n';
      if (fv.floor_breaches > 0)
        std::cerr << "warning: variance floor hit " << fv.floor_breaches << " times\n";
    } else if (*rec) {
      FitResult fr;
      fr.params = resolve_params(rp);
      fr.converged = true;
      RecoveryResult r;
      try {
        r = recover_diffusion(fr);
      } catch (const QuadratureError& e) {
        throw NumericalFailure(e.what());
      }
      Output out(output);
      write_record_csv(out.stream(), {recovery_record(r)});
    } else if (*exp) {
      ExperimentConfig cfg;
      if (!exp_config.empty()) {
        auto in = open_input(exp_config);
        cfg = load_experiment_config(in);
      }
      if (exp_paths) cfg.n_paths = *exp_paths;
      if (!exp_strides.empty()) cfg.strides = exp_strides;
      if (!exp_models.empty()) {
        cfg.models.clear();
        for (const auto& m : exp_models) cfg.models.push_back(parse_model(m));
      }
      if (exp_seed) cfg.master_seed = *exp_seed;
      if (exp_outdir) cfg.output_dir = *exp_outdir;
      if (exp_workers) cfg.workers = *exp_workers;
      if (exp_nobs) cfg.n_obs_per_frequency = *exp_nobs;
      if (exp_starts) cfg.fit.n_starts = *exp_starts;
      if (exp_verbose) cfg.verbose = true;
      cfg.validate();
      const auto report = run_experiment(cfg);
      write_experiment_outputs(cfg, report);
      write_table_csv(std::cout, report);
      if (report.failed) throw NumericalFailure("experiment failed: " + report.failure_reason);
    } else if (*figs) {
      const auto rows = emit_figure_grids(parse_figure(fig_which), grid);
      Output out(output);
      write_figure_csv(out.stream(), rows);
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
