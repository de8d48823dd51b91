#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qsdlim {

struct SimplexOptions {
  double initial_step = 0.25;
  /// Stop when the largest vertex distance from the best vertex (infinity
  /// norm) drops below this.
  double diameter_tol = 1e-6;
  std::size_t max_iterations = 2000;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool tolerance_reached = false;
};

/// Nelder-Mead minimization (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Non-finite objective values are treated as +infinity, so
/// infeasible regions repel the simplex.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> start, const SimplexOptions& options = {});

}  // namespace qsdlim
