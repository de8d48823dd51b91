#include "qsdlim/dist.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "qsdlim/errors.hpp"

namespace qsdlim {

void DistSpec::validate() const {
  switch (family) {
    case Family::normal:
      return;
    case Family::student_t:
      if (!(v > 2.0)) throw DomainError("student_t requires v > 2, got " + std::to_string(v));
      return;
    case Family::skew_t:
      if (!(v > 2.0)) throw DomainError("skew_t requires v > 2, got " + std::to_string(v));
      if (!(skew > 0.0 && skew < 1.0))
        throw DomainError("skew_t requires 0 < skew < 1, got " + std::to_string(skew));
      return;
  }
}

bool DistSpec::symmetric() const { return family != Family::skew_t || skew == 0.5; }

namespace {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_number(std::string_view text, std::string_view whole) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw DomainError("cannot parse distribution '" + std::string(whole) + "'");
  return x;
}

}  // namespace

std::string DistSpec::to_string() const {
  switch (family) {
    case Family::normal:
      return "normal";
    case Family::student_t:
      return "t:" + format_number(v);
    case Family::skew_t:
      return "st:" + format_number(v) + ":" + format_number(skew);
  }
  return {};
}

DistSpec DistSpec::parse(std::string_view text) {
  DistSpec spec;
  if (text == "normal") {
    spec = normal();
  } else if (text.starts_with("t:")) {
    spec = student_t(parse_number(text.substr(2), text));
  } else if (text.starts_with("st:")) {
    auto rest = text.substr(3);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos)
      throw DomainError("skew-t needs 'st:<v>:<skew>', got '" + std::string(text) + "'");
    spec = skew_t(parse_number(rest.substr(0, colon), text),
                  parse_number(rest.substr(colon + 1), text));
  } else {
    throw DomainError("unknown distribution '" + std::string(text) + "'");
  }
  spec.validate();
  return spec;
}

AstConstants ast_constants(double v, double skew) {
  if (!(v > 2.0)) throw DomainError("ast_constants requires v > 2");
  if (!(skew > 0.0 && skew < 1.0)) throw DomainError("ast_constants requires 0 < skew < 1");
  const double ratio = std::exp(std::lgamma(0.5 * (v - 1.0)) - std::lgamma(0.5 * v));
  const double b = 2.0 * ratio / std::sqrt(std::numbers::pi) * std::sqrt(v) * (1.0 - 2.0 * skew);
  const double a =
      std::sqrt(4.0 * v / (v - 2.0) * (3.0 * skew * skew - 3.0 * skew + 1.0) - b * b);
  return {b, a, -b / a};
}

StandardizedDensity::StandardizedDensity(const DistSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.family == Family::normal) {
    log_norm_ = -0.5 * std::log(2.0 * std::numbers::pi);
    return;
  }
  const double v = spec_.v;
  const double log_k = std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
                       0.5 * std::log(std::numbers::pi * v);
  if (spec_.family == Family::student_t) {
    // scale sqrt((v-2)/v) on the textbook t gives unit variance
    a_ = std::sqrt(v / (v - 2.0));
    b_ = 0.0;
    left_scale2_ = right_scale2_ = v;
  } else {
    const auto c = ast_constants(v, spec_.skew);
    a_ = c.a;
    b_ = c.b;
    left_scale2_ = 4.0 * v * spec_.skew * spec_.skew;
    right_scale2_ = 4.0 * v * (1.0 - spec_.skew) * (1.0 - spec_.skew);
  }
  breakpoint_ = -b_ / a_;
  log_norm_ = std::log(a_) + log_k;
}

// The boundary point z = a u + b = 0 belongs to the left branch.

double StandardizedDensity::log_density(double u) const {
  if (spec_.family == Family::normal) return log_norm_ - 0.5 * u * u;
  const double z = a_ * u + b_;
  const double s2 = z <= 0.0 ? left_scale2_ : right_scale2_;
  return log_norm_ - 0.5 * (spec_.v + 1.0) * std::log1p(z * z / s2);
}

double StandardizedDensity::density(double u) const { return std::exp(log_density(u)); }

double StandardizedDensity::dlog_density(double u) const {
  if (spec_.family == Family::normal) return -u;
  const double z = a_ * u + b_;
  const double s2 = z <= 0.0 ? left_scale2_ : right_scale2_;
  return -(spec_.v + 1.0) * a_ * z / (s2 + z * z);
}

double StandardizedDensity::score_kernel(double u) const {
  if (spec_.family == Family::normal) return 1.0 - u * u;
  return 1.0 + u * dlog_density(u);
}

double StandardizedDensity::sample(RandomStream& rng) const {
  switch (spec_.family) {
    case Family::normal:
      return rng.normal();
    case Family::student_t:
      return rng.student_t(spec_.v) / a_;
    case Family::skew_t: {
      // two-piece |t| mixture: left piece carries mass skew
      const double t = std::abs(rng.student_t(spec_.v));
      const double raw = rng.uniform() < spec_.skew ? -2.0 * spec_.skew * t
                                                    : 2.0 * (1.0 - spec_.skew) * t;
      return (raw - b_) / a_;
    }
  }
  return 0.0;
}

double log_density(const DistSpec& spec, double u) {
  return StandardizedDensity(spec).log_density(u);
}

double score_kernel(const DistSpec& spec, double u) {
  return StandardizedDensity(spec).score_kernel(u);
}

std::vector<double> sample(const DistSpec& spec, std::size_t n, RandomStream& rng) {
  const StandardizedDensity density(spec);
  std::vector<double> out(n);
  for (auto& x : out) x = density.sample(rng);
  return out;
}

}  // namespace qsdlim
