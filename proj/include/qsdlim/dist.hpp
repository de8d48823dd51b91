#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qsdlim/rng.hpp"

namespace qsdlim {

enum class Family { normal, student_t, skew_t };

/// Standardized (mean 0, variance 1) innovation or score distribution.
struct DistSpec {
  Family family = Family::normal;
  double v = 0.0;         ///< degrees of freedom (t families)
  double skew = 0.5;      ///< skewness parameter in (0,1) (skew_t only)

  static DistSpec normal() { return {}; }
  static DistSpec student_t(double v) { return {Family::student_t, v, 0.5}; }
  static DistSpec skew_t(double v, double skew) { return {Family::skew_t, v, skew}; }

  /// Throws DomainError unless v > 2 (t families) and 0 < skew < 1 (skew_t).
  void validate() const;

  /// normal, student_t, and skew_t with skew == 1/2.
  bool symmetric() const;

  /// "normal", "t:<v>", "st:<v>:<skew>"; parse() accepts the same forms.
  std::string to_string() const;
  static DistSpec parse(std::string_view text);

  friend bool operator==(const DistSpec&, const DistSpec&) = default;
};

/// Mean b and standard deviation a of the raw asymmetric t, and the
/// junction point -b/a of the standardized density.
struct AstConstants {
  double b;
  double a;
  double breakpoint;
};

AstConstants ast_constants(double v, double skew);

/// Precomputed standardized density. All members are cheap to evaluate;
/// construction does the log-gamma work once.
class StandardizedDensity {
 public:
  explicit StandardizedDensity(const DistSpec& spec);

  const DistSpec& spec() const { return spec_; }
  double breakpoint() const { return breakpoint_; }

  double log_density(double u) const;
  double density(double u) const;
  /// d/du log f(u).
  double dlog_density(double u) const;
  /// 1 + u * d/du log f(u).
  double score_kernel(double u) const;

  double sample(RandomStream& rng) const;

 private:
  DistSpec spec_;
  double a_ = 1.0;
  double b_ = 0.0;
  double breakpoint_ = 0.0;
  double log_norm_ = 0.0;   // log(a K(v)) or -log(2 pi)/2
  double left_scale2_ = 0.0;   // 4 v skew^2
  double right_scale2_ = 0.0;  // 4 v (1-skew)^2
};

double log_density(const DistSpec& spec, double u);
double score_kernel(const DistSpec& spec, double u);
std::vector<double> sample(const DistSpec& spec, std::size_t n, RandomStream& rng);

}  // namespace qsdlim
