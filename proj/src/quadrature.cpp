#include "qsdlim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "qsdlim/errors.hpp"

namespace qsdlim {

namespace {

// Kronrod abscissae; odd-indexed entries (1,3,...,9) are the 10-point Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  std::size_t piece;  // which mapped piece the segment belongs to
  double lo;
  double hi;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

/// A piece of the integration domain in its own (finite) coordinate.
struct Piece {
  enum class Kind { finite, to_plus_inf, to_minus_inf } kind;
  double anchor;  // finite start for half-lines

  double map(const std::function<double(double)>& f, double t) const {
    switch (kind) {
      case Kind::finite:
        return f(t);
      case Kind::to_plus_inf: {
        const double s = 1.0 - t;
        if (s <= 0.0) return 0.0;
        const double y = f(anchor + t / s);
        return y == 0.0 ? 0.0 : y / (s * s);
      }
      case Kind::to_minus_inf: {
        const double s = 1.0 - t;
        if (s <= 0.0) return 0.0;
        const double y = f(anchor - t / s);
        return y == 0.0 ? 0.0 : y / (s * s);
      }
    }
    return 0.0;
  }
};

Segment kronrod21(const std::function<double(double)>& f, const Piece& piece,
                  std::size_t index, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = piece.map(f, center);
  double res_k = kWgk[10] * fc;
  double res_g = 0.0;
  double res_abs = std::abs(res_k);
  std::array<double, 10> f1{}, f2{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = piece.map(f, center - dx);
    f2[j] = piece.map(f, center + dx);
    const double sum = f1[j] + f2[j];
    res_k += kWgk[j] * sum;
    res_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) res_g += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j)
    res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double value = res_k * half;
  res_abs *= std::abs(half);
  res_asc *= std::abs(half);
  double error = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && error != 0.0)
    error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
    error = std::max(50.0 * eps * res_abs, error);
  return {index, lo, hi, value, error};
}

QuadratureResult integrate_pieces(const std::function<double(double)>& f,
                                  const std::vector<Piece>& pieces,
                                  const std::vector<std::pair<double, double>>& ranges,
                                  const QuadratureOptions& options) {
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double total_error = 0.0;
  std::size_t evaluations = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto seg = kronrod21(f, pieces[i], i, ranges[i].first, ranges[i].second);
    evaluations += 21;
    total += seg.value;
    total_error += seg.error;
    heap.push(seg);
  }
  std::size_t subdivisions = 0;
  while (total_error > options.abs_tol) {
    if (!std::isfinite(total) || !std::isfinite(total_error))
      throw QuadratureError("integrand is not finite", total, total_error);
    if (subdivisions >= options.max_subdivisions)
      throw QuadratureError("quadrature did not converge: error estimate " +
                                std::to_string(total_error) + " > tolerance " +
                                std::to_string(options.abs_tol),
                            total, total_error);
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const auto& piece = pieces[worst.piece];
    auto left = kronrod21(f, piece, worst.piece, worst.lo, mid);
    auto right = kronrod21(f, piece, worst.piece, mid, worst.hi);
    evaluations += 42;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // re-sum to shed accumulated cancellation from the running updates
  total = 0.0;
  total_error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_error += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total)) throw QuadratureError("integrand is not finite", total, total_error);
  return {total, total_error, evaluations};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& options) {
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("integration bound is NaN");
  if (lo == hi) return {};
  if (lo > hi) {
    auto r = integrate(f, hi, lo, options);
    r.value = -r.value;
    return r;
  }
  std::vector<Piece> pieces;
  std::vector<std::pair<double, double>> ranges;
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (!lo_inf && !hi_inf) {
    pieces.push_back({Piece::Kind::finite, 0.0});
    ranges.emplace_back(lo, hi);
  } else if (lo_inf && hi_inf) {
    pieces.push_back({Piece::Kind::to_minus_inf, 0.0});
    ranges.emplace_back(0.0, 1.0);
    pieces.push_back({Piece::Kind::to_plus_inf, 0.0});
    ranges.emplace_back(0.0, 1.0);
  } else if (hi_inf) {
    pieces.push_back({Piece::Kind::to_plus_inf, lo});
    ranges.emplace_back(0.0, 1.0);
  } else {
    pieces.push_back({Piece::Kind::to_minus_inf, hi});
    ranges.emplace_back(0.0, 1.0);
  }
  return integrate_pieces(f, pieces, ranges, options);
}

QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     std::span<const double> breakpoints,
                                     const QuadratureOptions& options) {
  std::vector<double> points(breakpoints.begin(), breakpoints.end());
  for (double p : points)
    if (!std::isfinite(p)) throw DomainError("breakpoints must be finite");
  if (points.empty()) points.push_back(0.0);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  std::vector<Piece> pieces;
  std::vector<std::pair<double, double>> ranges;
  pieces.push_back({Piece::Kind::to_minus_inf, points.front()});
  ranges.emplace_back(0.0, 1.0);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    pieces.push_back({Piece::Kind::finite, 0.0});
    ranges.emplace_back(points[i], points[i + 1]);
  }
  pieces.push_back({Piece::Kind::to_plus_inf, points.back()});
  ranges.emplace_back(0.0, 1.0);
  return integrate_pieces(f, pieces, ranges, options);
}

}  // namespace qsdlim
