#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsdlim/estimate.hpp"
#include "qsdlim/sde.hpp"

namespace qsdlim {

struct ExperimentConfig {
  DiffusionParams dgp{0.01, 0.2, 2.5, -0.5};
  double dt = 1.0 / 19656.0;
  std::vector<std::size_t> strides{12, 78, 390};
  std::size_t n_paths = 50;
  std::vector<ModelTag> models{ModelTag::garch, ModelTag::qsd_st};
  std::uint64_t master_seed = 20240601;
  std::string output_dir = "experiment_out";
  std::size_t n_obs_per_frequency = 19656;
  /// Initial variance of every DGP path; <= 0 selects omega / theta.
  double sigma2_0 = 0.0;
  /// Worker threads; 0 selects hardware concurrency. QSDLIM_THREADS caps it.
  std::size_t workers = 0;
  FitOptions fit{};
  bool verbose = false;

  /// Throws DomainError on an unusable configuration.
  void validate() const;
};

/// Flat JSON object with the field names above; dgp is {omega, theta, kappa,
/// rho}, models is a list of model names. Missing keys keep their defaults.
ExperimentConfig load_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// One fitted model on one path at one observation stride.
struct PathRow {
  std::size_t path = 0;
  std::size_t stride = 0;
  ModelTag model = ModelTag::garch;
  FitResult fit;
  RecoveryResult recovery;
  double rmse = 0.0;
  double rmse_normalized = 0.0;  ///< rmse / rmse of GARCH on the same path and stride
  std::size_t dgp_floor_breaches = 0;
  std::size_t filter_floor_breaches = 0;
};

struct SummaryStat {
  std::string quantity;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

struct CellSummary {
  ModelTag model = ModelTag::garch;
  std::size_t stride = 0;
  std::vector<SummaryStat> stats;
  std::size_t n_failed = 0;
  std::size_t floor_breaches = 0;

  const SummaryStat& stat(const std::string& quantity) const;
};

struct ExperimentReport {
  std::vector<PathRow> rows;   ///< ordered by (path, stride, model)
  std::vector<CellSummary> cells;  ///< ordered by (stride, model)
  bool failed = false;
  std::string failure_reason;
};

/// Simulates n_paths DGP paths per stride, fits every model, recovers the
/// diffusion, filters, and scores RMSE against the true variance at the
/// observation instants. Paths run in parallel; results do not depend on
/// the worker count. The report is marked failed if more than 20% of the
/// paths fail in any (model, stride) cell. GARCH is fitted even when not
/// listed, as the RMSE normalizer.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Aggregates per-path rows into (model, stride) cells.
std::vector<CellSummary> summarize(const std::vector<PathRow>& rows,
                                   const std::vector<ModelTag>& models,
                                   const std::vector<std::size_t>& strides);

/// First (model, stride) cell where more than 20% of n_paths failed, as a
/// message; empty when every cell is within bounds.
std::string failed_cell(const std::vector<CellSummary>& cells, std::size_t n_paths);

void write_paths_csv(std::ostream& out, const std::vector<PathRow>& rows);
void write_report_csv(std::ostream& out, const ExperimentReport& report);
/// Wide layout: one row per (quantity, model), one column per stride.
void write_table_csv(std::ostream& out, const ExperimentReport& report);

/// Writes paths.csv, report.csv and table.csv into cfg.output_dir.
void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentReport& report);

enum class FigureKind { fig1, fig2, fig3 };

FigureKind parse_figure(const std::string& name);

struct FigureGrid {
  double v_min = 4.5;
  double v_max = 30.0;
  std::size_t v_count = 12;
  double skew_min = 0.1;
  double skew_max = 0.9;
  std::size_t skew_count = 9;
  double tol = 1e-9;
};

/// A normal distribution is written with v = inf.
struct FigureRow {
  double v1 = 0.0;
  double v2 = 0.0;
  double skew1 = 0.5;
  double skew2 = 0.5;
  double value = 0.0;
  bool computable = false;
};

/// fig1: diffusion factor 2 sqrt(m2 - mu^2) over (v1, v2) for t/t, with
///       normal rows for Beta-normal, t-GARCH and GARCH.
/// fig2: correlation over (v1, v2) for skew1 in {2/3, 1/2, 1/3} and
///       skew2 in {1/3, 1/2, 2/3}.
/// fig3: correlation over (skew1, skew2) for v1 in {4, 20}, v2 in {4, 8, 20}.
/// Points outside the moment floors, or failing the limit conditions, are
/// emitted with computable = false.
std::vector<FigureRow> emit_figure_grids(FigureKind which, const FigureGrid& grid = {});

void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows);

}  // namespace qsdlim
