#include "qsdlim/moments.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "qsdlim/errors.hpp"
#include "qsdlim/quadrature.hpp"

namespace qsdlim {

MomentSet compute_moments(const DistSpec& f_spec, const DistSpec& g_spec, double tol) {
  f_spec.validate();
  g_spec.validate();
  if (f_spec.family != Family::normal && g_spec.family == Family::normal && !(f_spec.v > 4.0))
    throw DomainError("normal score density needs v_f > 4 for m2 to exist");
  if (!(tol > 0.0)) throw DomainError("quadrature tolerance must be positive");

  const StandardizedDensity f(f_spec);
  const StandardizedDensity g(g_spec);
  const std::array<double, 3> breaks = {f.breakpoint(), g.breakpoint(), 0.0};
  const QuadratureOptions options{.abs_tol = tol};

  auto expect = [&](auto&& h) {
    return integrate_real_line([&](double u) {
                                 const double w = f.density(u);
                                 return w > 0.0 ? h(u) * w : 0.0;
                               }, breaks, options)
        .value;
  };

  MomentSet ms;
  ms.eta = expect([](double u) { return u * u; });
  ms.mu = -0.5 * expect([&](double u) { return g.score_kernel(u); });
  ms.m2 = 0.25 * expect([&](double u) {
    const double k = g.score_kernel(u);
    return k * k;
  });
  ms.rho_int = expect([&](double u) { return u * u * g.dlog_density(u); });

  const double centered = ms.m2 - ms.mu * ms.mu;
  ms.vol_of_vol_unit = std::sqrt(std::max(centered, 0.0));
  ms.corr = centered > 0.0 && ms.eta > 0.0
                ? -ms.rho_int / (2.0 * std::sqrt(ms.eta * centered))
                : std::numeric_limits<double>::quiet_NaN();
  return ms;
}

LimitValidity check_limit_conditions(const MomentSet& ms) {
  LimitValidity out;
  out.variance_margin = ms.m2 - ms.mu * ms.mu;
  out.margin = 4.0 * ms.eta * out.variance_margin - ms.rho_int * ms.rho_int;
  out.valid = ms.eta > 0.0 && out.variance_margin > 0.0 && out.margin > 0.0;
  return out;
}

double diffusion_coefficient(const MomentSet& ms, double alpha) {
  const double centered = ms.m2 - ms.mu * ms.mu;
  if (centered < 0.0) throw DomainError("diffusion_coefficient requires m2 >= mu^2");
  return 2.0 * alpha * std::sqrt(centered);
}

}  // namespace qsdlim
