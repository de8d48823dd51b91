#include "qsdlim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qsdlim/errors.hpp"

namespace qsdlim {

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> start, const SimplexOptions& options) {
  const std::size_t n = start.size();
  if (n == 0) throw DomainError("nelder_mead needs at least one coordinate");
  constexpr double inf = std::numeric_limits<double>::infinity();

  SimplexResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : inf;
  };

  std::vector<std::vector<double>> vertex(n + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) vertex[i + 1][i] += options.initial_step;
  std::vector<double> value(n + 1);
  for (std::size_t i = 0; i <= n; ++i) value[i] = eval(vertex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](double t, std::vector<double>& out) {
    // centroid + t (centroid - worst)
    const auto& worst = vertex[order[n]];
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (centroid[j] - worst[j]);
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });

    const auto& best = vertex[order[0]];
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        diameter = std::max(diameter, std::abs(vertex[order[i]][j] - best[j]));
    if (diameter < options.diameter_tol) {
      result.tolerance_reached = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += vertex[order[i]][j];
    for (double& c : centroid) c /= static_cast<double>(n);

    const std::size_t worst = order[n];
    const double f_best = value[order[0]];
    const double f_second = value[order[n - 1]];
    const double f_worst = value[worst];

    along(1.0, trial);
    const double f_reflect = eval(trial);
    if (f_reflect < f_best) {
      along(2.0, trial2);
      const double f_expand = eval(trial2);
      if (f_expand < f_reflect) {
        vertex[worst] = trial2;
        value[worst] = f_expand;
      } else {
        vertex[worst] = trial;
        value[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < f_second) {
      vertex[worst] = trial;
      value[worst] = f_reflect;
      continue;
    }
    if (f_reflect < f_worst) {
      along(0.5, trial2);  // outside contraction
      const double f_contract = eval(trial2);
      if (f_contract <= f_reflect) {
        vertex[worst] = trial2;
        value[worst] = f_contract;
        continue;
      }
    } else {
      along(-0.5, trial2);  // inside contraction
      const double f_contract = eval(trial2);
      if (f_contract < f_worst) {
        vertex[worst] = trial2;
        value[worst] = f_contract;
        continue;
      }
    }
    // shrink toward the best vertex
    const auto anchor = vertex[order[0]];
    for (std::size_t i = 1; i <= n; ++i) {
      auto& v = vertex[order[i]];
      for (std::size_t j = 0; j < n; ++j) v[j] = anchor[j] + 0.5 * (v[j] - anchor[j]);
      value[order[i]] = eval(v);
    }
  }

  const auto best = static_cast<std::size_t>(
      std::min_element(value.begin(), value.end()) - value.begin());
  result.x = vertex[best];
  result.value = value[best];
  return result;
}

}  // namespace qsdlim
