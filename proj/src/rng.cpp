#include "qsdlim/rng.hpp"

#include <vector>

namespace qsdlim {

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

RandomStream RandomStream::derive(std::uint64_t master_seed,
                                  std::initializer_list<std::uint64_t> indices) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (indices.size() + 1));
  auto push = [&words](std::uint64_t x) {
    words.push_back(static_cast<std::uint32_t>(x));
    words.push_back(static_cast<std::uint32_t>(x >> 32));
  };
  push(master_seed);
  for (auto i : indices) push(i);
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return RandomStream((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
}

double RandomStream::student_t(double v) {
  std::student_t_distribution<double> dist(v);
  return dist(engine_);
}

}  // namespace qsdlim
