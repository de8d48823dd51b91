#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsdlim/dist.hpp"
#include "qsdlim/rng.hpp"

namespace qsdlim {

/// Lower clamp applied to every variance produced by a recursion.
inline constexpr double kVarianceFloor = 1e-12;

/// Discrete QSD model observed every h years. Variances are per-year, the
/// return over one interval is y = sqrt(sigma2 h) U with U ~ f, and the
/// variance moves by the quasi score of g:
///   sigma2' = omega_h + beta_h sigma2 - alpha_h sigma2 K_g(y / sqrt(sigma2 h)).
struct QsdParams {
  double omega_h = 0.0;
  double beta_h = 0.0;
  double alpha_h = 0.0;
  DistSpec f_spec;
  DistSpec g_spec;
  double h = 1.0;
};

/// Time grid, log price, variance, and returns. returns[k-1] is the change
/// x[k] - x[k-1], so returns is one element shorter than x; sigma2[k] is the
/// variance in force over (t[k], t[k+1]].
struct SamplePath {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> sigma2;
  std::vector<double> returns;
  std::size_t floor_breaches = 0;
};

/// One variance update, written per family of g:
///   normal: omega + beta s + alpha (y^2/h - s)
///   t:      omega + beta s + alpha s [(v+1) y^2 / ((v-2) s h + y^2) - 1]
///   skew-t: omega + beta s + alpha s [a u (a u + b)(v+1) / ((a u + b)^2 + 4 v r*^2) - 1]
/// No floor is applied here. Throws DomainError if sigma2 <= 0.
double update_sigma2(const QsdParams& p, double sigma2, double y);

/// Reusable form of the update with the g constants precomputed.
class VarianceRecursion {
 public:
  explicit VarianceRecursion(const QsdParams& p);

  double next(double sigma2, double y) const;

  /// next() clamped at kVarianceFloor; increments breaches when clamped.
  double next_floored(double sigma2, double y, std::size_t& breaches) const {
    const double s = next(sigma2, y);
    if (s > kVarianceFloor) return s;
    ++breaches;
    return kVarianceFloor;
  }

 private:
  QsdParams p_;
  Family g_family_;
  double v_ = 0.0;
  double a_ = 1.0;
  double b_ = 0.0;
  double left_scale2_ = 0.0;
  double right_scale2_ = 0.0;
};

SamplePath simulate_qsd(const QsdParams& p, std::size_t n_steps, double sigma2_0,
                        RandomStream& rng);

struct FilteredVariance {
  std::vector<double> sigma2;  ///< n + 1 values; sigma2[0] = sigma2_0
  std::size_t floor_breaches = 0;
};

FilteredVariance filter(const QsdParams& p, std::span<const double> returns, double sigma2_0);

/// Scale-family log likelihood
///   sum_k log f(y_k / sqrt(s_k h)) - log(s_k h) / 2
/// over the filtered variances s_k. Returns -infinity if any term is not finite.
double log_likelihood(const QsdParams& p, std::span<const double> returns, double sigma2_0);

/// Sample variance of the first min(n, 250) returns divided by h.
double initial_variance(std::span<const double> returns, double h);

}  // namespace qsdlim
