#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace fgbench {

using Rng = std::mt19937_64;

// Named sub-streams derived from one root seed. Changing how many draws one
// consumer makes never shifts another consumer's sequence.
enum class Stream : std::uint32_t {
  kEnvSetup = 1,
  kEnvContext = 2,
  kEnvNoise = 3,
  kPolicy = 4,
  kSampler = 5,
  kDatasetShuffle = 6,
};

inline Rng make_stream(std::uint64_t root_seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return Rng(seq);
}

inline Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = normal(rng);
  return out;
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace fgbench
