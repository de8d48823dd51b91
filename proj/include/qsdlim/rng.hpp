#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qsdlim {

/// Seeded random source. One stream per thread; streams for independent
/// paths are derived from a master seed and a list of indices so that
/// results do not depend on scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  static RandomStream derive(std::uint64_t master_seed,
                             std::initializer_list<std::uint64_t> indices);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double student_t(double v);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace qsdlim
