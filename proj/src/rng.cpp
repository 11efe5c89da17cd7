#include "pmnl/rng.hpp"

#include <algorithm>
#include <cmath>

#include "pmnl/errors.hpp"

namespace pmnl {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t state = x;
  return splitmix64(state);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Rng Rng::stream(std::uint64_t base, std::uint64_t replication, std::uint64_t purpose) {
  const std::uint64_t key =
      mix64(base) ^ mix64(replication * 0xd1b54a32d192ed03ULL + purpose * 0x8cb92ba72f3d8dd7ULL +
                          0x2545f4914f6cdd1dULL);
  return Rng(key);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw InvalidInput("uniform_index: empty range");
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t draw;
  do {
    draw = next();
  } while (draw >= limit);
  return draw % n;
}

long Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidInput("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    long k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= mean / k;
      cdf += p;
      if (p == 0.0) break;
    }
    return k;
  }
  // PTRS transformed rejection (Hormann 1993).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + kd * loglam - std::lgamma(kd + 1.0)) {
      return static_cast<long>(kd);
    }
  }
}

long Rng::binomial(long trials, double p) {
  if (trials < 0) throw InvalidInput("binomial: negative trial count");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("binomial: probability outside [0, 1]");
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  if (p > 0.5) return trials - binomial(trials, 1.0 - p);
  const double q = 1.0 - p;
  const double n = static_cast<double>(trials);
  if (n * p < 10.0) {
    double prob = std::pow(q, n);
    double cdf = prob;
    const double u = uniform();
    long k = 0;
    const double ratio = p / q;
    while (u > cdf && k < trials) {
      prob *= ratio * (n - k) / (k + 1);
      ++k;
      cdf += prob;
      if (prob == 0.0 && cdf < u) break;
    }
    return k;
  }
  // BTRS transformed rejection (Hormann 1993).
  const double spq = std::sqrt(n * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = n * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / q);
  const double m = std::floor((n + 1.0) * p);
  const double h = std::lgamma(m + 1.0) + std::lgamma(n - m + 1.0);
  while (true) {
    const double u = uniform() - 0.5;
    double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + c);
    if (kd < 0.0 || kd > n) continue;
    if (us >= 0.07 && v <= vr) return static_cast<long>(kd);
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= h - std::lgamma(kd + 1.0) - std::lgamma(n - kd + 1.0) + (kd - m) * lpq) {
      return static_cast<long>(kd);
    }
  }
}

std::vector<long> Rng::multinomial(long trials, const Vec& probabilities) {
  std::vector<long> counts(probabilities.size(), 0);
  double remaining_mass = probabilities.sum();
  long remaining = trials;
  for (Eigen::Index i = 0; i + 1 < probabilities.size() && remaining > 0; ++i) {
    const double p = remaining_mass > 0.0 ? std::clamp(probabilities(i) / remaining_mass, 0.0, 1.0)
                                          : 0.0;
    counts[i] = binomial(remaining, p);
    remaining -= counts[i];
    remaining_mass -= probabilities(i);
  }
  if (!counts.empty()) counts.back() += remaining;
  return counts;
}

}  // namespace pmnl
