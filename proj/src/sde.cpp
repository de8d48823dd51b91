#include "qsdlim/sde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "qsdlim/errors.hpp"
#include "qsdlim/quadrature.hpp"

namespace qsdlim {

void DiffusionParams::validate() const {
  if (!(omega >= 0.0)) throw DomainError("diffusion omega must be >= 0");
  if (!(std::abs(rho) <= 1.0)) throw DomainError("diffusion rho must lie in [-1, 1]");
  if (!std::isfinite(theta) || !std::isfinite(kappa))
    throw DomainError("diffusion theta and kappa must be finite");
}

namespace {

class EulerStepper {
 public:
  EulerStepper(const DiffusionParams& d, double dt)
      : d_(d), dt_(dt), sqrt_dt_(std::sqrt(dt)), rho_perp_(std::sqrt(1.0 - d.rho * d.rho)) {}

  void step(double& x, double& sigma2, std::size_t& breaches, RandomStream& rng) const {
    const double z1 = rng.normal();
    const double z_perp = rng.normal();
    const double z2 = d_.rho * z1 + rho_perp_ * z_perp;
    const double s2 = sigma2;
    x += std::sqrt(s2) * sqrt_dt_ * z1;
    sigma2 = s2 + (d_.omega - d_.theta * s2) * dt_ + d_.kappa * s2 * sqrt_dt_ * z2;
    if (!(sigma2 > kVarianceFloor)) {
      sigma2 = kVarianceFloor;
      ++breaches;
    }
  }

 private:
  DiffusionParams d_;
  double dt_;
  double sqrt_dt_;
  double rho_perp_;
};

void check_inputs(const DiffusionParams& d, double dt, double sigma2_0) {
  d.validate();
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(sigma2_0 > 0.0)) throw DomainError("sigma2_0 must be positive");
}

}  // namespace

SamplePath simulate_diffusion(const DiffusionParams& d, double dt, std::size_t n_steps,
                              double sigma2_0, RandomStream& rng) {
  return simulate_diffusion_observed(d, dt, 1, n_steps, sigma2_0, rng);
}

SamplePath simulate_diffusion_observed(const DiffusionParams& d, double dt, std::size_t stride,
                                       std::size_t n_obs, double sigma2_0, RandomStream& rng) {
  check_inputs(d, dt, sigma2_0);
  if (stride == 0) throw DomainError("stride must be >= 1");
  const EulerStepper stepper(d, dt);
  SamplePath path;
  path.times.resize(n_obs + 1);
  path.x.resize(n_obs + 1);
  path.sigma2.resize(n_obs + 1);
  path.returns.resize(n_obs);
  double x = 0.0;
  double sigma2 = sigma2_0;
  path.times[0] = 0.0;
  path.x[0] = x;
  path.sigma2[0] = sigma2;
  for (std::size_t k = 1; k <= n_obs; ++k) {
    for (std::size_t j = 0; j < stride; ++j) stepper.step(x, sigma2, path.floor_breaches, rng);
    path.times[k] = static_cast<double>(k * stride) * dt;
    path.x[k] = x;
    path.sigma2[k] = sigma2;
    path.returns[k - 1] = x - path.x[k - 1];
  }
  return path;
}

std::vector<SamplePath> simulate_diffusion_strides(const DiffusionParams& d, double dt,
                                                   std::span<const std::size_t> strides,
                                                   std::size_t n_obs, double sigma2_0,
                                                   RandomStream& rng) {
  check_inputs(d, dt, sigma2_0);
  if (strides.empty()) throw DomainError("strides must be nonempty");
  std::size_t max_stride = 0;
  for (auto s : strides) {
    if (s == 0) throw DomainError("stride must be >= 1");
    max_stride = std::max(max_stride, s);
  }
  const EulerStepper stepper(d, dt);
  std::vector<SamplePath> paths(strides.size());
  for (auto& path : paths) {
    path.times.assign(n_obs + 1, 0.0);
    path.x.assign(n_obs + 1, 0.0);
    path.sigma2.assign(n_obs + 1, sigma2_0);
    path.returns.assign(n_obs, 0.0);
  }
  double x = 0.0;
  double sigma2 = sigma2_0;
  std::size_t breaches = 0;
  const std::size_t n_steps = max_stride * n_obs;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    stepper.step(x, sigma2, breaches, rng);
    for (std::size_t i = 0; i < strides.size(); ++i) {
      const std::size_t s = strides[i];
      if (step % s != 0 || step / s > n_obs) continue;
      const std::size_t k = step / s;
      auto& path = paths[i];
      path.times[k] = static_cast<double>(step) * dt;
      path.x[k] = x;
      path.sigma2[k] = sigma2;
      path.returns[k - 1] = x - path.x[k - 1];
      if (k == n_obs) path.floor_breaches = breaches;
    }
  }
  return paths;
}

SamplePath subsample(const SamplePath& path, std::size_t stride) {
  if (stride == 0) throw DomainError("stride must be >= 1");
  if (path.x.empty() || stride > path.x.size() - 1)
    throw DomainError("stride " + std::to_string(stride) + " exceeds path length");
  const std::size_t n_obs = (path.x.size() - 1) / stride;
  SamplePath out;
  out.floor_breaches = path.floor_breaches;
  out.times.resize(n_obs + 1);
  out.x.resize(n_obs + 1);
  out.sigma2.resize(n_obs + 1);
  out.returns.resize(n_obs);
  for (std::size_t k = 0; k <= n_obs; ++k) {
    out.times[k] = path.times[k * stride];
    out.x[k] = path.x[k * stride];
    out.sigma2[k] = path.sigma2[k * stride];
    if (k > 0) out.returns[k - 1] = out.x[k] - out.x[k - 1];
  }
  return out;
}

double MomentComparison::deviation() const { return std::abs(discrete - limit); }

MomentMatchReport moment_match_check(const QsdParams& p, const MomentSet& ms, double sigma2,
                                     double tol) {
  if (!(sigma2 > 0.0)) throw DomainError("moment_match_check requires sigma2 > 0");
  if (!(p.h > 0.0)) throw DomainError("observation interval h must be positive");
  const StandardizedDensity f(p.f_spec);
  const StandardizedDensity g(p.g_spec);
  const std::array<double, 3> breaks = {f.breakpoint(), g.breakpoint(), 0.0};
  const QuadratureOptions options{.abs_tol = tol};
  auto expect = [&](auto&& fn) {
    return integrate_real_line([&](double u) {
                                 const double w = f.density(u);
                                 return w > 0.0 ? fn(u) * w : 0.0;
                               }, breaks, options)
        .value;
  };

  // conditional moments of U and of the kernel K(U) under f
  const double e_u = expect([](double u) { return u; });
  const double e_u2 = expect([](double u) { return u * u; });
  const double e_k = expect([&](double u) { return g.score_kernel(u); });
  const double e_k2 = expect([&](double u) {
    const double k = g.score_kernel(u);
    return k * k;
  });
  const double e_uk = expect([&](double u) { return u * g.score_kernel(u); });

  // d sigma2 = D - alpha_h sigma2 K(U),  dX = sqrt(sigma2 h) U
  const double h = p.h;
  const double level = p.omega_h - (1.0 - p.beta_h) * sigma2;
  const double loading = p.alpha_h * sigma2;
  const double vol = std::sqrt(sigma2 * h);

  MomentMatchReport report;
  report.h = h;
  report.sigma2 = sigma2;
  report.drift.discrete = (level - loading * e_k) / h;
  report.variance.discrete =
      (level * level - 2.0 * level * loading * e_k + loading * loading * e_k2) / h;
  report.covariance.discrete = vol * (level * e_u - loading * e_uk) / h;
  report.return_variance.discrete = sigma2 * e_u2;

  const double omega = p.omega_h / h;
  const double alpha = p.alpha_h / std::sqrt(h);
  const double theta = (1.0 - p.beta_h - 2.0 * p.alpha_h * ms.mu) / h;
  report.drift.limit = omega - theta * sigma2;
  report.variance.limit = 4.0 * alpha * alpha * (ms.m2 - ms.mu * ms.mu) * sigma2 * sigma2;
  report.covariance.limit = -alpha * sigma2 * std::sqrt(sigma2) * ms.rho_int;
  report.return_variance.limit = ms.eta * sigma2;
  return report;
}

}  // namespace qsdlim
