#pragma once
// Independent reference implementations used only by the tests. Nothing
// here calls into the library.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Raw moments of the asymmetric t: E X^k = (2 sqrt v)^k [(-1)^k r^(k+1) +
// (1-r)^(k+1)] G((k+1)/2) G((v-k)/2) / (sqrt(pi) G(v/2)).
inline double ast_raw_moment(int k, double v, double r) {
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return std::pow(2.0 * std::sqrt(v), k) *
         (sign * std::pow(r, k + 1) + std::pow(1.0 - r, k + 1)) *
         std::exp(std::lgamma((k + 1) / 2.0) + std::lgamma((v - k) / 2.0) -
                  std::lgamma(v / 2.0)) /
         std::sqrt(kPi);
}

// Standardized two-piece t. normal when v is infinite.
struct Ast {
  double v;
  double r;
  double mean;
  double sd;

  Ast(double v_, double r_) : v(v_), r(r_) {
    if (std::isinf(v)) {
      mean = 0.0;
      sd = 1.0;
      return;
    }
    mean = ast_raw_moment(1, v, r);
    sd = std::sqrt(ast_raw_moment(2, v, r) - mean * mean);
  }

  double scale(double x) const { return x <= 0.0 ? 2.0 * r : 2.0 * (1.0 - r); }

  double raw_pdf(double x) const {
    const double c = std::exp(std::lgamma((v + 1) / 2.0) - std::lgamma(v / 2.0)) /
                     std::sqrt(kPi * v);
    const double w = x / scale(x);
    return c * std::pow(1.0 + w * w / v, -(v + 1) / 2.0);
  }

  double pdf(double u) const {
    if (std::isinf(v)) return std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi);
    return sd * raw_pdf(sd * u + mean);
  }

  double log_pdf(double u) const {
    if (std::isinf(v)) return -0.5 * u * u - 0.5 * std::log(2.0 * kPi);
    const double x = sd * u + mean;
    const double w = x / scale(x);
    return std::log(sd) + std::lgamma((v + 1) / 2.0) - std::lgamma(v / 2.0) -
           0.5 * std::log(kPi * v) - 0.5 * (v + 1) * std::log1p(w * w / v);
  }

  // d/du log pdf by differentiating the raw piece.
  double dlog_pdf(double u) const {
    if (std::isinf(v)) return -u;
    const double x = sd * u + mean;
    const double s = scale(x);
    return -sd * (v + 1) * x / (v * s * s + x * x);
  }

  double kernel(double u) const { return 1.0 + u * dlog_pdf(u); }

  double breakpoint() const { return std::isinf(v) ? 0.0 : -mean / sd; }

  // Two-piece CDF through the Student t CDF.
  double cdf(double u) const {
    if (std::isinf(v)) return 0.5 * std::erfc(-u / std::sqrt(2.0));
    const boost::math::students_t t(v);
    const double x = sd * u + mean;
    if (x <= 0.0) return 2.0 * r * boost::math::cdf(t, x / (2.0 * r));
    return r + 2.0 * (1.0 - r) * (boost::math::cdf(t, x / (2.0 * (1.0 - r))) - 0.5);
  }

  // Inverse-CDF draw.
  template <class Engine>
  double draw(Engine& eng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double p = unif(eng);
    const boost::math::students_t t(v);
    double x;
    if (p < r)
      x = 2.0 * r * boost::math::quantile(t, p / (2.0 * r));
    else
      x = 2.0 * (1.0 - r) * boost::math::quantile(t, 0.5 + (p - r) / (2.0 * (1.0 - r)));
    return (x - mean) / sd;
  }
};

// Integral over the real line split at the given (sorted) points, with
// Boost's double-exponential rules.
template <class F>
double integrate(F f, std::vector<double> cuts) {
  std::sort(cuts.begin(), cuts.end());
  boost::math::quadrature::exp_sinh<double> half;
  boost::math::quadrature::tanh_sinh<double> finite;
  const double lo = cuts.front();
  const double hi = cuts.back();
  double total = half.integrate([&](double t) { return f(lo - t); }, 0.0, kInf);
  total += half.integrate([&](double t) { return f(hi + t); }, 0.0, kInf);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += finite.integrate(f, cuts[i], cuts[i + 1]);
  return total;
}

struct Moments {
  double eta, mu, m2, rho_int, corr;
};

inline Moments moments(const Ast& f, const Ast& g) {
  const std::vector<double> cuts = {f.breakpoint(), g.breakpoint(), 0.0};
  auto e = [&](auto fn) { return integrate(
        [&](double u) {
          const double p = f.pdf(u);
          return p > 0.0 ? fn(u) * p : 0.0;
        },
        cuts); };
  Moments m;
  m.eta = e([](double u) { return u * u; });
  m.mu = -0.5 * e([&](double u) { return g.kernel(u); });
  m.m2 = 0.25 * e([&](double u) { return g.kernel(u) * g.kernel(u); });
  m.rho_int = e([&](double u) { return u * u * g.dlog_pdf(u); });
  m.corr = -m.rho_int / (2.0 * std::sqrt(m.eta * (m.m2 - m.mu * m.mu)));
  return m;
}

// GARCH(1,1) in Nelson form: s' = w + b s + a (y^2 - s), y = sqrt(s) z.
struct Garch {
  double w, b, a;
  double next(double s, double y) const { return w + b * s + a * (y * y - s); }
};

}  // namespace oracle
