#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsdlim/moments.hpp"
#include "qsdlim/optimizer.hpp"
#include "qsdlim/qsd.hpp"
#include "qsdlim/sde.hpp"

namespace qsdlim {

/// Members of the QSD family, by (f, g):
///   garch        normal / normal
///   t-garch      t(v1)  / normal
///   beta-t       t(v)   / t(v)
///   beta-normal  normal / t(v2)
///   beta-st      st(v,r)/ st(v,r)
///   qsd-t        t(v1)  / t(v2)
///   qsd-st       st(v1,r1) / st(v2,r2)
enum class ModelTag { garch, t_garch, beta_t, beta_normal, beta_st, qsd_t, qsd_st };

std::string_view to_string(ModelTag model);
ModelTag parse_model(std::string_view name);
std::span<const ModelTag> all_models();

/// Number of free parameters (omega_h, beta_h, alpha_h plus shape).
std::size_t parameter_count(ModelTag model);

/// Map between the unconstrained search space and QsdParams:
///   omega_h = exp(x0), beta_h = logistic(x1), alpha_h = x2,
///   v = 2.05 + exp(.), skew = logistic(.)
QsdParams params_from_unconstrained(ModelTag model, std::span<const double> x, double h);
std::vector<double> unconstrained_from_params(ModelTag model, const QsdParams& p);

/// Lower bound on fitted degrees of freedom.
inline constexpr double kMinDegreesOfFreedom = 2.05;
/// Box on the score loading during estimation.
inline constexpr double kMaxAbsAlpha = 5.0;
/// Fewer observations than this is rejected by fit_mle.
inline constexpr std::size_t kMinObservations = 500;

struct FitOptions {
  std::size_t n_starts = 5;
  double jitter_sd = 0.25;
  SimplexOptions simplex{};
};

struct FitResult {
  ModelTag model = ModelTag::garch;
  QsdParams params;
  double sigma2_0 = 0.0;
  double loglik = 0.0;
  bool converged = false;
  bool tolerance_reached = false;
  std::size_t n_iters = 0;
  std::size_t n_restarts_used = 0;
  std::string diagnostics;
};

/// Maximum likelihood over the model's free parameters by multi-start
/// Nelder-Mead in the unconstrained space. The first start is the default
/// initial point; later starts jitter it by N(0, jitter_sd) per coordinate.
/// sigma2_0 is fixed by initial_variance(). Degenerate data yields a
/// non-converged result rather than an exception.
FitResult fit_mle(ModelTag model, std::span<const double> returns, double h, std::uint64_t seed,
                  const FitOptions& options = {});

struct RecoveryResult {
  DiffusionParams diffusion;
  MomentSet moments;
  bool valid = false;
  double alpha = 0.0;        ///< alpha_h / sqrt(h)
  double theta_raw = 0.0;    ///< (1 - beta_h) / h
  double theta_drift = 0.0;  ///< (1 - beta_h - 2 alpha_h mu) / h
};

/// Inverts the scaling omega_h = omega h, beta_h = 1 - theta h,
/// alpha_h = alpha sqrt(h) and reads the diffusion off the limit:
///   theta = (1 - beta_h)/h - 2 alpha mu,  kappa = 2 |alpha| sqrt(m2 - mu^2),
///   rho = sign(alpha) (-rho_int) / (2 sqrt(eta (m2 - mu^2))).
/// Throws DomainError for a non-converged fit.
RecoveryResult recover_diffusion(const FitResult& fit, double tol = 1e-9);

/// Root mean square difference of two equal-length variance paths.
double rmse_filtered(std::span<const double> filtered, std::span<const double> truth);

}  // namespace qsdlim
