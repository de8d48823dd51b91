#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qsdlim/dist.hpp"
#include "qsdlim/errors.hpp"

using namespace qsdlim;

namespace {

const std::vector<DistSpec> kSpecs = {
    DistSpec::normal(),         DistSpec::student_t(2.5),   DistSpec::student_t(5.0),
    DistSpec::student_t(30.0),  DistSpec::skew_t(6.0, 2.0 / 3.0), DistSpec::skew_t(8.0, 1.0 / 3.0),
    DistSpec::skew_t(4.5, 0.1), DistSpec::skew_t(12.0, 0.9), DistSpec::skew_t(57.0, 0.15),
};

oracle::Ast as_oracle(const DistSpec& s) {
  if (s.family == Family::normal) return {oracle::kInf, 0.5};
  return {s.v, s.skew};
}

}  // namespace

TEST_CASE("standardized densities integrate to one with mean zero and unit variance") {
  for (const auto& spec : kSpecs) {
    CAPTURE(spec.to_string());
    const StandardizedDensity f(spec);
    auto moment = [&](int k) {
      return oracle::integrate(
          [&](double u) { return std::pow(u, k) * f.density(u); }, {f.breakpoint(), 0.0});
    };
    CHECK(moment(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(moment(1)) < 1e-9);
    // heavy tails at v = 2.5 leave a slowly decaying integrand
    const double tol = spec.v > 0.0 && spec.v < 3.0 ? 1e-4 : 1e-9;
    CHECK(moment(2) == doctest::Approx(1.0).epsilon(tol));
  }
}

TEST_CASE("log density agrees with the two-piece formula on both sides of the junction") {
  for (const auto& spec : kSpecs) {
    CAPTURE(spec.to_string());
    const StandardizedDensity f(spec);
    const auto o = as_oracle(spec);
    CHECK(f.breakpoint() == doctest::Approx(o.breakpoint()).epsilon(1e-13));
    for (double u : {-25.0, -3.0, -1.0, f.breakpoint() - 1e-9, f.breakpoint(),
                     f.breakpoint() + 1e-9, 0.0, 0.7, 4.0, 40.0}) {
      CAPTURE(u);
      CHECK(f.log_density(u) == doctest::Approx(o.log_pdf(u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ast constants") {
  SUBCASE("symmetric skew reduces to the scaled t") {
    for (double v : {3.0, 5.0, 8.0, 40.0}) {
      const auto c = ast_constants(v, 0.5);
      CHECK(c.b == 0.0);
      CHECK(c.a == doctest::Approx(std::sqrt(v / (v - 2.0))).epsilon(1e-14));
    }
  }
  SUBCASE("mean and sd match the raw moment series") {
    for (double v : {4.5, 6.0, 20.0})
      for (double r : {0.1, 1.0 / 3.0, 0.7}) {
        const auto c = ast_constants(v, r);
        const oracle::Ast o(v, r);
        CHECK(c.b == doctest::Approx(o.mean).epsilon(1e-13));
        CHECK(c.a == doctest::Approx(o.sd).epsilon(1e-13));
      }
  }
  SUBCASE("skew 1/2 density equals the t density") {
    const StandardizedDensity st(DistSpec::skew_t(7.0, 0.5));
    const StandardizedDensity t(DistSpec::student_t(7.0));
    for (double u = -8.0; u <= 8.0; u += 0.37) CHECK(st.log_density(u) == t.log_density(u));
  }
}

TEST_CASE("dlog_density matches central differences and kernel definition") {
  for (const auto& spec : kSpecs) {
    CAPTURE(spec.to_string());
    const StandardizedDensity f(spec);
    for (double u : {-6.0, -1.3, -0.2, 0.4, 2.2, 9.0}) {
      if (std::abs(u - f.breakpoint()) < 1e-3) continue;
      const double e = 1e-5;
      const double fd = (f.log_density(u + e) - f.log_density(u - e)) / (2 * e);
      CHECK(f.dlog_density(u) == doctest::Approx(fd).epsilon(1e-7));
      CHECK(f.score_kernel(u) == doctest::Approx(1.0 + u * f.dlog_density(u)).epsilon(1e-15));
    }
  }
  SUBCASE("normal kernel is 1 - u^2") {
    for (double u : {-3.0, 0.0, 0.5, 2.0}) CHECK(score_kernel(DistSpec::normal(), u) == 1.0 - u * u);
  }
  SUBCASE("t kernel at zero is one and bounded in the tails") {
    for (double v : {3.0, 8.0}) {
      CHECK(score_kernel(DistSpec::student_t(v), 0.0) == 1.0);
      CHECK(score_kernel(DistSpec::student_t(v), 1e6) == doctest::Approx(-v).epsilon(1e-6));
    }
  }
}

TEST_CASE("samplers follow the closed-form CDF (Kolmogorov-Smirnov at 1e6 draws)") {
  const std::size_t n = 1000000;
  for (const auto& spec :
       {DistSpec::normal(), DistSpec::student_t(5.0), DistSpec::skew_t(6.0, 2.0 / 3.0),
        DistSpec::skew_t(4.5, 0.15)}) {
    CAPTURE(spec.to_string());
    RandomStream rng(2024);
    auto xs = sample(spec, n, rng);
    std::sort(xs.begin(), xs.end());
    const auto o = as_oracle(spec);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double F = o.cdf(xs[i]);
      d = std::max({d, std::abs(F - double(i) / n), std::abs(F - double(i + 1) / n)});
    }
    // 1% critical value
    CHECK(d < 1.63 / std::sqrt(double(n)));
  }
}

TEST_CASE("spec validation and text round trip") {
  CHECK_THROWS_AS(DistSpec::student_t(2.0).validate(), DomainError);
  CHECK_THROWS_AS(DistSpec::skew_t(5.0, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(DistSpec::skew_t(5.0, 1.0).validate(), DomainError);
  CHECK_THROWS_AS(StandardizedDensity(DistSpec::student_t(1.5)), DomainError);
  CHECK_THROWS_AS(DistSpec::parse("t:"), DomainError);
  CHECK_THROWS_AS(DistSpec::parse("gamma:3"), DomainError);
  for (const auto& spec : kSpecs) CHECK(DistSpec::parse(spec.to_string()) == spec);
  CHECK(DistSpec::parse("st:6:0.5").symmetric());
  CHECK_FALSE(DistSpec::parse("st:6:0.4").symmetric());
}
