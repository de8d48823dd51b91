#include "qsdlim/estimate.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "qsdlim/errors.hpp"

namespace qsdlim {

namespace {

constexpr std::array<ModelTag, 7> kModels = {ModelTag::garch,       ModelTag::t_garch,
                                             ModelTag::beta_t,      ModelTag::beta_normal,
                                             ModelTag::beta_st,     ModelTag::qsd_t,
                                             ModelTag::qsd_st};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }
double dof(double x) { return kMinDegreesOfFreedom + std::exp(x); }
double dof_inverse(double v) { return std::log(v - kMinDegreesOfFreedom); }

constexpr double kInitialBeta = 0.9;
constexpr double kInitialAlpha = 0.05;
constexpr double kInitialDof = 8.0;
constexpr double kInitialSkew = 0.5;

}  // namespace

std::string_view to_string(ModelTag model) {
  switch (model) {
    case ModelTag::garch: return "garch";
    case ModelTag::t_garch: return "t-garch";
    case ModelTag::beta_t: return "beta-t";
    case ModelTag::beta_normal: return "beta-normal";
    case ModelTag::beta_st: return "beta-st";
    case ModelTag::qsd_t: return "qsd-t";
    case ModelTag::qsd_st: return "qsd-st";
  }
  return "?";
}

ModelTag parse_model(std::string_view name) {
  for (auto m : kModels)
    if (to_string(m) == name) return m;
  throw DomainError("unknown model '" + std::string(name) + "'");
}

std::span<const ModelTag> all_models() { return kModels; }

std::size_t parameter_count(ModelTag model) {
  switch (model) {
    case ModelTag::garch: return 3;
    case ModelTag::t_garch:
    case ModelTag::beta_t:
    case ModelTag::beta_normal: return 4;
    case ModelTag::beta_st:
    case ModelTag::qsd_t: return 5;
    case ModelTag::qsd_st: return 7;
  }
  return 0;
}

QsdParams params_from_unconstrained(ModelTag model, std::span<const double> x, double h) {
  if (x.size() != parameter_count(model)) throw DomainError("parameter vector has wrong size");
  QsdParams p;
  p.h = h;
  p.omega_h = std::exp(x[0]);
  p.beta_h = logistic(x[1]);
  p.alpha_h = x[2];
  switch (model) {
    case ModelTag::garch:
      p.f_spec = p.g_spec = DistSpec::normal();
      break;
    case ModelTag::t_garch:
      p.f_spec = DistSpec::student_t(dof(x[3]));
      p.g_spec = DistSpec::normal();
      break;
    case ModelTag::beta_t:
      p.f_spec = p.g_spec = DistSpec::student_t(dof(x[3]));
      break;
    case ModelTag::beta_normal:
      p.f_spec = DistSpec::normal();
      p.g_spec = DistSpec::student_t(dof(x[3]));
      break;
    case ModelTag::beta_st:
      p.f_spec = p.g_spec = DistSpec::skew_t(dof(x[3]), logistic(x[4]));
      break;
    case ModelTag::qsd_t:
      p.f_spec = DistSpec::student_t(dof(x[3]));
      p.g_spec = DistSpec::student_t(dof(x[4]));
      break;
    case ModelTag::qsd_st:
      p.f_spec = DistSpec::skew_t(dof(x[3]), logistic(x[4]));
      p.g_spec = DistSpec::skew_t(dof(x[5]), logistic(x[6]));
      break;
  }
  return p;
}

std::vector<double> unconstrained_from_params(ModelTag model, const QsdParams& p) {
  std::vector<double> x = {std::log(p.omega_h), logit(p.beta_h), p.alpha_h};
  switch (model) {
    case ModelTag::garch:
      break;
    case ModelTag::t_garch:
    case ModelTag::beta_t:
      x.push_back(dof_inverse(p.f_spec.v));
      break;
    case ModelTag::beta_normal:
      x.push_back(dof_inverse(p.g_spec.v));
      break;
    case ModelTag::beta_st:
      x.push_back(dof_inverse(p.f_spec.v));
      x.push_back(logit(p.f_spec.skew));
      break;
    case ModelTag::qsd_t:
      x.push_back(dof_inverse(p.f_spec.v));
      x.push_back(dof_inverse(p.g_spec.v));
      break;
    case ModelTag::qsd_st:
      x.push_back(dof_inverse(p.f_spec.v));
      x.push_back(logit(p.f_spec.skew));
      x.push_back(dof_inverse(p.g_spec.v));
      x.push_back(logit(p.g_spec.skew));
      break;
  }
  return x;
}

FitResult fit_mle(ModelTag model, std::span<const double> returns, double h, std::uint64_t seed,
                  const FitOptions& options) {
  if (!(h > 0.0)) throw DomainError("observation interval h must be positive");
  if (returns.size() < kMinObservations)
    throw DomainError("fit_mle needs at least " + std::to_string(kMinObservations) +
                      " observations, got " + std::to_string(returns.size()));
  for (double y : returns)
    if (!std::isfinite(y)) throw DomainError("returns must be finite");

  FitResult result;
  result.model = model;
  result.loglik = -std::numeric_limits<double>::infinity();

  const double sigma2_0 = initial_variance(returns, h);
  double mean = 0.0;
  for (double y : returns) mean += y;
  mean /= static_cast<double>(returns.size());
  double var = 0.0;
  for (double y : returns) var += (y - mean) * (y - mean);
  var /= static_cast<double>(returns.size() - 1);
  if (!(sigma2_0 > 0.0) || !(var > 1e-24 * mean * mean)) {
    result.diagnostics = "returns have zero sample variance";
    return result;
  }
  result.sigma2_0 = sigma2_0;

  QsdParams initial;
  initial.h = h;
  initial.omega_h = 0.1 * var / h;
  initial.beta_h = kInitialBeta;
  initial.alpha_h = kInitialAlpha;
  initial.f_spec = initial.g_spec = DistSpec::skew_t(kInitialDof, kInitialSkew);
  const auto x0 = unconstrained_from_params(model, initial);

  auto objective = [&](std::span<const double> x) {
    if (std::abs(x[2]) > kMaxAbsAlpha) return std::numeric_limits<double>::infinity();
    const auto p = params_from_unconstrained(model, x, h);
    return -log_likelihood(p, returns, sigma2_0);
  };

  RandomStream jitter(seed);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  for (std::size_t start = 0; start < options.n_starts; ++start) {
    auto x = x0;
    if (start > 0)
      for (double& xi : x) xi += options.jitter_sd * jitter.normal();
    const auto run = nelder_mead(objective, x, options.simplex);
    result.n_iters += run.iterations;
    ++result.n_restarts_used;
    if (run.value < best) {
      best = run.value;
      best_x = run.x;
      result.tolerance_reached = run.tolerance_reached;
    }
  }

  if (!std::isfinite(best)) {
    result.diagnostics = "every start diverged (non-finite likelihood)";
    return result;
  }
  result.params = params_from_unconstrained(model, best_x, h);
  result.loglik = -best;
  result.converged = true;
  if (!result.tolerance_reached) result.diagnostics = "iteration cap reached";
  return result;
}

RecoveryResult recover_diffusion(const FitResult& fit, double tol) {
  if (!fit.converged) throw DomainError("recover_diffusion needs a converged fit");
  const auto& p = fit.params;
  const double h = p.h;
  RecoveryResult out;
  out.alpha = p.alpha_h / std::sqrt(h);
  out.theta_raw = (1.0 - p.beta_h) / h;
  out.diffusion.omega = p.omega_h / h;
  try {
    out.moments = compute_moments(p.f_spec, p.g_spec, tol);
  } catch (const DomainError&) {
    // moments do not exist (e.g. t-GARCH with v <= 4)
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    out.moments = {nan, nan, nan, nan, nan, nan};
    out.theta_drift = nan;
    out.diffusion.theta = nan;
    out.diffusion.kappa = nan;
    out.diffusion.rho = nan;
    out.valid = false;
    return out;
  }
  const auto& ms = out.moments;
  const double sign = out.alpha < 0.0 ? -1.0 : 1.0;
  out.theta_drift = (1.0 - p.beta_h - 2.0 * p.alpha_h * ms.mu) / h;
  out.diffusion.theta = out.theta_raw - 2.0 * out.alpha * ms.mu;
  out.diffusion.kappa = std::abs(2.0 * out.alpha * ms.vol_of_vol_unit);
  out.diffusion.rho = sign * ms.corr + 0.0;  // no negative zero
  out.valid = check_limit_conditions(ms).valid && std::abs(out.diffusion.rho) <= 1.0;
  return out;
}

double rmse_filtered(std::span<const double> filtered, std::span<const double> truth) {
  if (filtered.size() != truth.size())
    throw DomainError("rmse_filtered: length mismatch (" + std::to_string(filtered.size()) +
                      " vs " + std::to_string(truth.size()) + ")");
  if (filtered.empty()) throw DomainError("rmse_filtered needs at least one value");
  double ss = 0.0;
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    const double d = filtered[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(filtered.size()));
}

}  // namespace qsdlim
