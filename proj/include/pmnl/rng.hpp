#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "pmnl/linalg.hpp"

namespace pmnl {

/// xoshiro256** seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kAlgorithm = "xoshiro256starstar/splitmix64";

  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream for (base seed, replication, purpose).
  static Rng stream(std::uint64_t base, std::uint64_t replication, std::uint64_t purpose);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  long poisson(double mean);
  long binomial(long trials, double p);
  /// Counts over categories; probabilities need not be normalised exactly.
  std::vector<long> multinomial(long trials, const Vec& probabilities);

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);

/// Stream purposes used across the harness.
enum StreamPurpose : std::uint64_t {
  kStreamTruth = 1,
  kStreamFeatures = 2,
  kStreamOutcomes = 3,
  kStreamPolicy = 4,
};

}  // namespace pmnl
