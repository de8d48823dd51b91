#pragma once

#include "qsdlim/dist.hpp"

namespace qsdlim {

/// Limit functionals of the quasi-score kernel K(u) = 1 + u g'(u)/g(u)
/// under the innovation density f:
///   eta     = E[U^2]
///   mu      = -E[K(U)] / 2          (m_1)
///   m2      =  E[K(U)^2] / 4
///   rho_int =  E[U^2 g'(U)/g(U)]
/// corr is the Brownian correlation of the limit diffusion and
/// vol_of_vol_unit = sqrt(m2 - mu^2) its diffusion factor per unit alpha.
struct MomentSet {
  double eta = 0.0;
  double mu = 0.0;
  double m2 = 0.0;
  double rho_int = 0.0;
  double corr = 0.0;
  double vol_of_vol_unit = 0.0;
};

/// Quadrature of the moment functionals to absolute tolerance tol.
/// Requires v_f > 2, and v_f > 4 when g is normal (the kernel then grows
/// like u^2). Throws DomainError on a violated floor and QuadratureError
/// when an integral does not converge.
MomentSet compute_moments(const DistSpec& f_spec, const DistSpec& g_spec, double tol = 1e-9);

struct LimitValidity {
  bool valid = false;
  /// 4 eta (m2 - mu^2) - rho_int^2; must be > 0.
  double margin = 0.0;
  /// m2 - mu^2; must be > 0 (nondegenerate diffusion).
  double variance_margin = 0.0;
};

LimitValidity check_limit_conditions(const MomentSet& ms);

/// 2 alpha sqrt(m2 - mu^2).
double diffusion_coefficient(const MomentSet& ms, double alpha);

}  // namespace qsdlim
