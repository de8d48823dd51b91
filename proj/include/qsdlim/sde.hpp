#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qsdlim/moments.hpp"
#include "qsdlim/qsd.hpp"
#include "qsdlim/rng.hpp"

namespace qsdlim {

/// dX = sigma dW1,  d sigma2 = (omega - theta sigma2) dt + kappa sigma2 dW2,
/// corr(dW1, dW2) = rho.
struct DiffusionParams {
  double omega = 0.0;
  double theta = 0.0;
  double kappa = 0.0;
  double rho = 0.0;

  /// Throws DomainError unless omega >= 0 and |rho| <= 1.
  void validate() const;
};

/// Euler-Maruyama on a grid of step dt, with sigma2 truncated at
/// kVarianceFloor (breaches counted).
SamplePath simulate_diffusion(const DiffusionParams& d, double dt, std::size_t n_steps,
                              double sigma2_0, RandomStream& rng);

/// Same scheme and random draws as simulate_diffusion over stride * n_obs
/// steps, but only the observation instants are stored. Equal to
/// subsample(simulate_diffusion(...), stride) without the fine-grid memory.
SamplePath simulate_diffusion_observed(const DiffusionParams& d, double dt, std::size_t stride,
                                       std::size_t n_obs, double sigma2_0, RandomStream& rng);

/// One fine path of max(strides) * n_obs steps observed at several strides.
/// Entry i holds the first n_obs observations at strides[i]; its
/// floor_breaches counts the steps up to its own horizon.
std::vector<SamplePath> simulate_diffusion_strides(const DiffusionParams& d, double dt,
                                                   std::span<const std::size_t> strides,
                                                   std::size_t n_obs, double sigma2_0,
                                                   RandomStream& rng);

/// Every stride-th grid point; trailing points that do not fill a whole
/// observation interval are dropped.
SamplePath subsample(const SamplePath& path, std::size_t stride);

/// One entry of the drift/covariance comparison.
struct MomentComparison {
  double discrete = 0.0;  ///< exact one-step conditional moment per unit time
  double limit = 0.0;     ///< diffusion-limit target
  double deviation() const;
};

/// Exact one-step conditional moments of the discrete model at a given
/// variance, against the diffusion-limit coefficients obtained through
///   omega = omega_h / h, alpha = alpha_h / sqrt(h),
///   theta = (1 - beta_h - 2 alpha_h mu) / h.
struct MomentMatchReport {
  double h = 0.0;
  double sigma2 = 0.0;
  MomentComparison drift;         ///< E[d sigma2] / h  vs  omega - theta sigma2
  MomentComparison variance;      ///< E[(d sigma2)^2] / h  vs  4 alpha^2 (m2 - mu^2) sigma2^2
  MomentComparison covariance;    ///< E[dX d sigma2] / h  vs  -alpha sigma^3 rho_int
  MomentComparison return_variance;  ///< E[dX^2] / h  vs  eta sigma2
};

MomentMatchReport moment_match_check(const QsdParams& p, const MomentSet& ms, double sigma2,
                                     double tol = 1e-11);

}  // namespace qsdlim
