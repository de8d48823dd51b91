#include "qsdlim/qsd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsdlim/errors.hpp"

namespace qsdlim {

namespace {

void check_params(const QsdParams& p) {
  if (!(p.h > 0.0)) throw DomainError("observation interval h must be positive");
  p.f_spec.validate();
  p.g_spec.validate();
}

}  // namespace

VarianceRecursion::VarianceRecursion(const QsdParams& p) : p_(p), g_family_(p.g_spec.family) {
  check_params(p_);
  v_ = p_.g_spec.v;
  if (g_family_ == Family::skew_t) {
    const auto c = ast_constants(v_, p_.g_spec.skew);
    a_ = c.a;
    b_ = c.b;
    left_scale2_ = 4.0 * v_ * p_.g_spec.skew * p_.g_spec.skew;
    right_scale2_ = 4.0 * v_ * (1.0 - p_.g_spec.skew) * (1.0 - p_.g_spec.skew);
  }
}

double VarianceRecursion::next(double sigma2, double y) const {
  const double base = p_.omega_h + p_.beta_h * sigma2;
  switch (g_family_) {
    case Family::normal:
      return base + p_.alpha_h * (y * y / p_.h - sigma2);
    case Family::student_t: {
      const double y2 = y * y;
      return base + p_.alpha_h * sigma2 * ((v_ + 1.0) * y2 / ((v_ - 2.0) * sigma2 * p_.h + y2) - 1.0);
    }
    case Family::skew_t: {
      const double u = y / std::sqrt(sigma2 * p_.h);
      const double z = a_ * u + b_;
      const double s2 = z <= 0.0 ? left_scale2_ : right_scale2_;
      return base + p_.alpha_h * sigma2 * (a_ * u * z * (v_ + 1.0) / (z * z + s2) - 1.0);
    }
  }
  return base;
}

double update_sigma2(const QsdParams& p, double sigma2, double y) {
  if (!(sigma2 > 0.0)) throw DomainError("update_sigma2 requires sigma2 > 0");
  return VarianceRecursion(p).next(sigma2, y);
}

SamplePath simulate_qsd(const QsdParams& p, std::size_t n_steps, double sigma2_0,
                        RandomStream& rng) {
  if (!(sigma2_0 > 0.0)) throw DomainError("simulate_qsd requires sigma2_0 > 0");
  const VarianceRecursion recursion(p);
  const StandardizedDensity f(p.f_spec);

  SamplePath path;
  path.times.resize(n_steps + 1);
  path.x.resize(n_steps + 1);
  path.sigma2.resize(n_steps + 1);
  path.returns.resize(n_steps);
  path.times[0] = 0.0;
  path.x[0] = 0.0;
  path.sigma2[0] = sigma2_0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double s = path.sigma2[k - 1];
    const double y = std::sqrt(s * p.h) * f.sample(rng);
    path.returns[k - 1] = y;
    path.x[k] = path.x[k - 1] + y;
    path.times[k] = static_cast<double>(k) * p.h;
    path.sigma2[k] = recursion.next_floored(s, y, path.floor_breaches);
  }
  return path;
}

FilteredVariance filter(const QsdParams& p, std::span<const double> returns, double sigma2_0) {
  if (!(sigma2_0 > 0.0)) throw DomainError("filter requires sigma2_0 > 0");
  const VarianceRecursion recursion(p);
  FilteredVariance out;
  out.sigma2.resize(returns.size() + 1);
  out.sigma2[0] = sigma2_0;
  for (std::size_t k = 0; k < returns.size(); ++k)
    out.sigma2[k + 1] = recursion.next_floored(out.sigma2[k], returns[k], out.floor_breaches);
  return out;
}

double log_likelihood(const QsdParams& p, std::span<const double> returns, double sigma2_0) {
  if (!(sigma2_0 > 0.0)) throw DomainError("log_likelihood requires sigma2_0 > 0");
  const VarianceRecursion recursion(p);
  const StandardizedDensity f(p.f_spec);
  std::size_t breaches = 0;
  double s = sigma2_0;
  double total = 0.0;
  for (double y : returns) {
    const double scale2 = s * p.h;
    total += f.log_density(y / std::sqrt(scale2)) - 0.5 * std::log(scale2);
    s = recursion.next_floored(s, y, breaches);
  }
  if (!std::isfinite(total)) return -std::numeric_limits<double>::infinity();
  return total;
}

double initial_variance(std::span<const double> returns, double h) {
  if (returns.empty()) throw DomainError("initial_variance needs at least one return");
  if (!(h > 0.0)) throw DomainError("observation interval h must be positive");
  const std::size_t n = std::min<std::size_t>(returns.size(), 250);
  if (n == 1) return returns[0] * returns[0] / h;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += returns[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (returns[i] - mean) * (returns[i] - mean);
  return ss / static_cast<double>(n - 1) / h;
}

}  // namespace qsdlim
