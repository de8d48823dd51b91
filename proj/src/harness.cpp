#include "qsdlim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qsdlim/csv.hpp"
#include "qsdlim/errors.hpp"

namespace qsdlim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxFailedFraction = 0.2;

double dof_or_inf(const DistSpec& s) { return s.family == Family::normal ? kInf : s.v; }

}  // namespace

void ExperimentConfig::validate() const {
  dgp.validate();
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (strides.empty()) throw DomainError("strides must be nonempty");
  for (auto s : strides)
    if (s == 0) throw DomainError("strides must be >= 1");
  if (n_paths == 0) throw DomainError("n_paths must be >= 1");
  if (models.empty()) throw DomainError("models must be nonempty");
  if (n_obs_per_frequency < kMinObservations)
    throw DomainError("n_obs_per_frequency must be at least " + std::to_string(kMinObservations));
  if (fit.n_starts == 0) throw DomainError("n_starts must be >= 1");
  if (!(sigma2_0 > 0.0) && !(dgp.theta > 0.0 && dgp.omega > 0.0))
    throw DomainError("sigma2_0 must be given when omega / theta is not a positive level");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& key = it.key();
      const auto& val = it.value();
      if (key == "dgp") {
        for (auto d = val.begin(); d != val.end(); ++d) {
          if (d.key() == "omega") cfg.dgp.omega = d->get<double>();
          else if (d.key() == "theta") cfg.dgp.theta = d->get<double>();
          else if (d.key() == "kappa") cfg.dgp.kappa = d->get<double>();
          else if (d.key() == "rho") cfg.dgp.rho = d->get<double>();
          else throw DomainError("unknown dgp key '" + d.key() + "'");
        }
      } else if (key == "dt") {
        cfg.dt = val.get<double>();
      } else if (key == "strides") {
        cfg.strides = val.get<std::vector<std::size_t>>();
      } else if (key == "n_paths") {
        cfg.n_paths = val.get<std::size_t>();
      } else if (key == "models") {
        cfg.models.clear();
        for (const auto& m : val) cfg.models.push_back(parse_model(m.get<std::string>()));
      } else if (key == "master_seed") {
        cfg.master_seed = val.get<std::uint64_t>();
      } else if (key == "output_dir") {
        cfg.output_dir = val.get<std::string>();
      } else if (key == "n_obs_per_frequency") {
        cfg.n_obs_per_frequency = val.get<std::size_t>();
      } else if (key == "sigma2_0") {
        cfg.sigma2_0 = val.get<double>();
      } else if (key == "workers") {
        cfg.workers = val.get<std::size_t>();
      } else if (key == "n_starts") {
        cfg.fit.n_starts = val.get<std::size_t>();
      } else if (key == "verbose") {
        cfg.verbose = val.get<bool>();
      } else {
        throw DomainError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

const SummaryStat& CellSummary::stat(const std::string& quantity) const {
  for (const auto& s : stats)
    if (s.quantity == quantity) return s;
  throw DomainError("no summary quantity '" + quantity + "'");
}

namespace {

struct Quantity {
  const char* name;
  double (*get)(const PathRow&);
  bool needs_valid_recovery;
};

// Order here is the row order of the report.
const Quantity kQuantities[] = {
    {"omega_h", [](const PathRow& r) { return r.fit.params.omega_h; }, false},
    {"beta_h", [](const PathRow& r) { return r.fit.params.beta_h; }, false},
    {"alpha_h", [](const PathRow& r) { return r.fit.params.alpha_h; }, false},
    {"v1", [](const PathRow& r) { return dof_or_inf(r.fit.params.f_spec); }, false},
    {"rho1", [](const PathRow& r) { return r.fit.params.f_spec.skew; }, false},
    {"v2", [](const PathRow& r) { return dof_or_inf(r.fit.params.g_spec); }, false},
    {"rho2", [](const PathRow& r) { return r.fit.params.g_spec.skew; }, false},
    {"loglik", [](const PathRow& r) { return r.fit.loglik; }, false},
    {"omega", [](const PathRow& r) { return r.recovery.diffusion.omega; }, true},
    {"theta", [](const PathRow& r) { return r.recovery.diffusion.theta; }, true},
    {"theta_raw", [](const PathRow& r) { return r.recovery.theta_raw; }, true},
    {"theta_drift", [](const PathRow& r) { return r.recovery.theta_drift; }, true},
    {"kappa", [](const PathRow& r) { return r.recovery.diffusion.kappa; }, true},
    {"rho", [](const PathRow& r) { return r.recovery.diffusion.rho; }, true},
    {"rmse", [](const PathRow& r) { return r.rmse; }, false},
    {"rmse_normalized", [](const PathRow& r) { return r.rmse_normalized; }, false},
};

SummaryStat summarize_values(const std::string& name, const std::vector<double>& xs) {
  SummaryStat s;
  s.quantity = name;
  s.n = xs.size();
  if (xs.empty()) {
    s.mean = s.sd = kNaN;
    return s;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) {
    s.sd = kNaN;
    return s;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return s;
}

std::vector<ModelTag> with_garch(const std::vector<ModelTag>& models) {
  std::vector<ModelTag> out;
  if (std::find(models.begin(), models.end(), ModelTag::garch) == models.end())
    out.push_back(ModelTag::garch);
  for (auto m : models)
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  return out;
}

std::size_t worker_count(const ExperimentConfig& cfg) {
  std::size_t n = cfg.workers;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QSDLIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::clamp<std::size_t>(n, 1, cfg.n_paths);
}

bool row_ok(const PathRow& r) { return r.fit.converged && std::isfinite(r.rmse); }

// All strides and models for one path. Every random draw comes from streams
// derived from (master seed, path, ...), never from shared state.
std::vector<PathRow> run_path(const ExperimentConfig& cfg, const std::vector<ModelTag>& models,
                              std::size_t path_index, double sigma2_0) {
  auto dgp_rng = RandomStream::derive(cfg.master_seed, {path_index});
  const auto paths = simulate_diffusion_strides(cfg.dgp, cfg.dt, cfg.strides,
                                                cfg.n_obs_per_frequency, sigma2_0, dgp_rng);
  std::vector<PathRow> rows;
  for (std::size_t si = 0; si < cfg.strides.size(); ++si) {
    const auto& sp = paths[si];
    const std::size_t stride = cfg.strides[si];
    const double h = static_cast<double>(stride) * cfg.dt;
    const std::size_t first = rows.size();
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      PathRow row;
      row.path = path_index;
      row.stride = stride;
      row.model = models[mi];
      row.fit.model = models[mi];
      row.rmse = row.rmse_normalized = kNaN;
      row.dgp_floor_breaches = sp.floor_breaches;
      const auto seed =
          RandomStream::derive(cfg.master_seed, {path_index, stride, mi + 1}).engine()();
      try {
        row.fit = fit_mle(models[mi], sp.returns, h, seed, cfg.fit);
        if (row.fit.converged) {
          row.recovery = recover_diffusion(row.fit);
          const auto filtered = filter(row.fit.params, sp.returns, row.fit.sigma2_0);
          row.filter_floor_breaches = filtered.floor_breaches;
          row.rmse = rmse_filtered(filtered.sigma2, sp.sigma2);
        }
      } catch (const std::exception& e) {
        row.fit.converged = false;
        row.fit.diagnostics = e.what();
      }
      if (!row_ok(row))
        std::clog << "qsdlim: path " << path_index << " stride " << stride << " model "
                  << to_string(models[mi]) << " failed: "
                  << (row.fit.diagnostics.empty() ? "non-finite RMSE" : row.fit.diagnostics)
                  << '\n';
      rows.push_back(std::move(row));
    }
    const PathRow& garch = rows[first];  // GARCH is always first
    for (std::size_t i = first; i < rows.size(); ++i) {
      auto& r = rows[i];
      if (row_ok(r) && row_ok(garch) && garch.rmse > 0.0) r.rmse_normalized = r.rmse / garch.rmse;
    }
  }
  return rows;
}

}  // namespace

std::vector<CellSummary> summarize(const std::vector<PathRow>& rows,
                                   const std::vector<ModelTag>& models,
                                   const std::vector<std::size_t>& strides) {
  std::vector<CellSummary> cells;
  for (auto stride : strides) {
    for (auto model : models) {
      CellSummary cell;
      cell.model = model;
      cell.stride = stride;
      std::vector<const PathRow*> ok;
      for (const auto& r : rows) {
        if (r.model != model || r.stride != stride) continue;
        if (row_ok(r)) {
          ok.push_back(&r);
          cell.floor_breaches += r.filter_floor_breaches;
        } else {
          ++cell.n_failed;
        }
      }
      for (const auto& q : kQuantities) {
        std::vector<double> xs;
        for (const auto* r : ok) {
          if (q.needs_valid_recovery && !r->recovery.valid) continue;
          const double x = q.get(*r);
          if (std::isfinite(x)) xs.push_back(x);
        }
        cell.stats.push_back(summarize_values(q.name, xs));
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string failed_cell(const std::vector<CellSummary>& cells, std::size_t n_paths) {
  for (const auto& cell : cells)
    if (static_cast<double>(cell.n_failed) > kMaxFailedFraction * static_cast<double>(n_paths))
      return std::string(to_string(cell.model)) + " at stride " + std::to_string(cell.stride) +
             ": " + std::to_string(cell.n_failed) + " of " + std::to_string(n_paths) +
             " paths failed";
  return {};
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto models = with_garch(cfg.models);
  const double sigma2_0 = cfg.sigma2_0 > 0.0 ? cfg.sigma2_0 : cfg.dgp.omega / cfg.dgp.theta;

  std::vector<std::vector<PathRow>> per_path(cfg.n_paths);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.n_paths; i = next++) {
      per_path[i] = run_path(cfg, models, i, sigma2_0);
      if (cfg.verbose) std::clog << "qsdlim: path " << i << " done\n";
    }
  };
  const std::size_t n_workers = worker_count(cfg);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  ExperimentReport report;
  for (auto& rows : per_path)
    for (auto& r : rows) report.rows.push_back(std::move(r));
  report.cells = summarize(report.rows, models, cfg.strides);
  report.failure_reason = failed_cell(report.cells, cfg.n_paths);
  report.failed = !report.failure_reason.empty();
  return report;
}

namespace {

std::string clean_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

void write_paths_csv(std::ostream& out, const std::vector<PathRow>& rows) {
  out << "path,stride,model,converged,tolerance_reached,n_iters,loglik,sigma2_0,omega_h,beta_h,"
         "alpha_h,f,g,omega,theta,theta_raw,theta_drift,alpha,kappa,rho,valid,rmse,"
         "rmse_normalized,dgp_floor_breaches,filter_floor_breaches,diagnostics\n";
  for (const auto& r : rows) {
    const auto& p = r.fit.params;
    const auto& d = r.recovery.diffusion;
    const bool fitted = r.fit.converged;
    auto num = [&](double x) { return fitted ? format_double(x) : format_double(kNaN); };
    out << r.path << ',' << r.stride << ',' << to_string(r.model) << ','
        << (r.fit.converged ? 1 : 0) << ',' << (r.fit.tolerance_reached ? 1 : 0) << ','
        << r.fit.n_iters << ',' << num(r.fit.loglik) << ',' << num(r.fit.sigma2_0) << ','
        << num(p.omega_h) << ',' << num(p.beta_h) << ',' << num(p.alpha_h) << ','
        << (fitted ? p.f_spec.to_string() : "") << ',' << (fitted ? p.g_spec.to_string() : "")
        << ',' << num(d.omega) << ',' << num(d.theta) << ',' << num(r.recovery.theta_raw) << ','
        << num(r.recovery.theta_drift) << ',' << num(r.recovery.alpha) << ',' << num(d.kappa)
        << ',' << num(d.rho) << ',' << (r.recovery.valid ? 1 : 0) << ','
        << format_double(r.rmse) << ',' << format_double(r.rmse_normalized) << ','
        << r.dgp_floor_breaches << ',' << r.filter_floor_breaches << ','
        << clean_field(r.fit.diagnostics) << '\n';
  }
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "model,stride,quantity,mean,sd,n\n";
  for (const auto& cell : report.cells) {
    const auto prefix = std::string(to_string(cell.model)) + ',' + std::to_string(cell.stride);
    for (const auto& s : cell.stats)
      out << prefix << ',' << s.quantity << ',' << format_double(s.mean) << ','
          << format_double(s.sd) << ',' << s.n << '\n';
    out << prefix << ",failed," << cell.n_failed << ",0,1\n";
    out << prefix << ",floor_breaches," << cell.floor_breaches << ",0,1\n";
  }
}

void write_table_csv(std::ostream& out, const ExperimentReport& report) {
  std::vector<std::size_t> strides;
  std::vector<ModelTag> models;
  for (const auto& c : report.cells) {
    if (std::find(strides.begin(), strides.end(), c.stride) == strides.end())
      strides.push_back(c.stride);
    if (std::find(models.begin(), models.end(), c.model) == models.end())
      models.push_back(c.model);
  }
  out << "quantity,model";
  for (auto s : strides) out << ",s=" << s << " mean,s=" << s << " sd";
  out << '\n';
  for (const auto& q : kQuantities) {
    for (auto m : models) {
      out << q.name << ',' << to_string(m);
      for (auto s : strides) {
        for (const auto& c : report.cells) {
          if (c.model != m || c.stride != s) continue;
          const auto& st = c.stat(q.name);
          out << ',' << format_double(st.mean) << ',' << format_double(st.sd);
        }
      }
      out << '\n';
    }
  }
}

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentReport& report) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("paths.csv");
    write_paths_csv(f, report.rows);
  }
  {
    auto f = open("report.csv");
    write_report_csv(f, report);
  }
  {
    auto f = open("table.csv");
    write_table_csv(f, report);
  }
}

FigureKind parse_figure(const std::string& name) {
  if (name == "fig1") return FigureKind::fig1;
  if (name == "fig2") return FigureKind::fig2;
  if (name == "fig3") return FigureKind::fig3;
  throw DomainError("unknown figure '" + name + "' (expected fig1, fig2 or fig3)");
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) throw DomainError("grid needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

FigureRow grid_point(const DistSpec& f, const DistSpec& g, bool want_corr, double tol) {
  FigureRow row;
  row.v1 = dof_or_inf(f);
  row.v2 = dof_or_inf(g);
  row.skew1 = f.skew;
  row.skew2 = g.skew;
  row.value = kNaN;
  try {
    f.validate();
    g.validate();
    const auto ms = compute_moments(f, g, tol);
    if (!check_limit_conditions(ms).valid) return row;
    row.value = want_corr ? ms.corr : 2.0 * ms.vol_of_vol_unit;
    row.computable = std::isfinite(row.value);
  } catch (const DomainError&) {
  } catch (const QuadratureError&) {
  }
  return row;
}

}  // namespace

std::vector<FigureRow> emit_figure_grids(FigureKind which, const FigureGrid& grid) {
  std::vector<FigureRow> rows;
  const auto vs = linspace(grid.v_min, grid.v_max, grid.v_count);
  const auto skews = linspace(grid.skew_min, grid.skew_max, grid.skew_count);
  switch (which) {
    case FigureKind::fig1: {
      const auto normal = DistSpec::normal();
      rows.push_back(grid_point(normal, normal, false, grid.tol));
      for (double v2 : vs) rows.push_back(grid_point(normal, DistSpec::student_t(v2), false, grid.tol));
      for (double v1 : vs) {
        rows.push_back(grid_point(DistSpec::student_t(v1), normal, false, grid.tol));
        for (double v2 : vs)
          rows.push_back(
              grid_point(DistSpec::student_t(v1), DistSpec::student_t(v2), false, grid.tol));
      }
      break;
    }
    case FigureKind::fig2:
      for (double r1 : {2.0 / 3.0, 0.5, 1.0 / 3.0})
        for (double r2 : {1.0 / 3.0, 0.5, 2.0 / 3.0})
          for (double v1 : vs)
            for (double v2 : vs)
              rows.push_back(grid_point(DistSpec::skew_t(v1, r1), DistSpec::skew_t(v2, r2), true,
                                        grid.tol));
      break;
    case FigureKind::fig3:
      for (double v1 : {4.0, 20.0})
        for (double v2 : {4.0, 8.0, 20.0})
          for (double r1 : skews)
            for (double r2 : skews)
              rows.push_back(grid_point(DistSpec::skew_t(v1, r1), DistSpec::skew_t(v2, r2), true,
                                        grid.tol));
      break;
  }
  return rows;
}

void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows) {
  out << "v1,v2,rho1,rho2,value\n";
  for (const auto& r : rows)
    out << format_double(r.v1) << ',' << format_double(r.v2) << ',' << format_double(r.skew1)
        << ',' << format_double(r.skew2) << ',' << (r.computable ? format_double(r.value) : "NA")
        << '\n';
}

}  // namespace qsdlim
