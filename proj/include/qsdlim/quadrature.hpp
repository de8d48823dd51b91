#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace qsdlim {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  std::size_t max_subdivisions = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Globally adaptive 21-point Gauss-Kronrod quadrature over [lo, hi].
/// Either bound may be infinite; half-lines are mapped onto [0,1) by
/// x = c +/- t/(1-t). Throws QuadratureError when the subdivision budget is
/// exhausted before the error estimate drops below abs_tol.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& options = {});

/// Integral over the whole real line, split at the given points (kinks of
/// the integrand). Breakpoints need not be sorted or distinct.
QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     std::span<const double> breakpoints,
                                     const QuadratureOptions& options = {});

}  // namespace qsdlim
