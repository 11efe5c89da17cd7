#include <cmath>
#include <set>

#include "doctest.h"
#include "pmnl/rng.hpp"

using namespace pmnl;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <typename F>
Moments sample(int n, F&& draw) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  Moments m;
  m.mean = s / n;
  m.var = s2 / n - m.mean * m.mean;
  return m;
}

}  // namespace

TEST_SUITE("rng") {

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("streams are distinct per replication and purpose") {
  std::set<std::uint64_t> first;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    for (std::uint64_t purpose = 1; purpose <= 4; ++purpose) {
      first.insert(Rng::stream(7, rep, purpose).next());
    }
  }
  CHECK(first.size() == 200);
  CHECK(Rng::stream(7, 3, 2).next() == Rng::stream(7, 3, 2).next());
}

TEST_CASE("uniform draws stay in range") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.uniform_index(7) < 7);
  }
  const Moments m = sample(100000, [&] { return rng.uniform(); });
  CHECK(std::abs(m.mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST_CASE("poisson mean and variance across regimes") {
  for (double mean : {0.0, 0.3, 4.0, 29.5, 30.0, 250.0, 40000.0}) {
    Rng rng(static_cast<std::uint64_t>(mean * 10) + 5);
    const int n = 10000;
    const Moments m = sample(n, [&] { return static_cast<double>(rng.poisson(mean)); });
    const double se = std::sqrt(std::max(mean, 1e-12) / n);
    CHECK(std::abs(m.mean - mean) <= 3.0 * se + 1e-12);
    if (mean > 0.0) CHECK(std::abs(m.var / mean - 1.0) < 0.1);
  }
}

TEST_CASE("binomial moments") {
  for (auto [trials, p] : {std::pair{5L, 0.3}, std::pair{40L, 0.2}, std::pair{1000L, 0.6}, std::pair{100000L, 0.01}}) {
    Rng rng(static_cast<std::uint64_t>(trials));
    const int n = 10000;
    const Moments m = sample(n, [&] { return static_cast<double>(rng.binomial(trials, p)); });
    const double mu = trials * p;
    const double var = trials * p * (1 - p);
    CHECK(std::abs(m.mean - mu) <= 3.0 * std::sqrt(var / n));
    CHECK(std::abs(m.var / var - 1.0) < 0.1);
  }
  Rng rng(3);
  CHECK(rng.binomial(10, 0.0) == 0);
  CHECK(rng.binomial(10, 1.0) == 10);
}

TEST_CASE("multinomial counts sum to the trials") {
  Rng rng(77);
  Vec p(4);
  p << 0.1, 0.0, 0.6, 0.3;
  Vec total = Vec::Zero(4);
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    const auto c = rng.multinomial(50, p);
    long sum = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      sum += c[k];
      total(static_cast<Eigen::Index>(k)) += static_cast<double>(c[k]);
    }
    CHECK(sum == 50);
    CHECK(c[1] == 0);
  }
  for (int k = 0; k < 4; ++k) {
    const double n = 50.0 * reps;
    const double se = std::sqrt(n * p(k) * (1 - p(k)));
    CHECK(std::abs(total(k) - n * p(k)) <= 3.0 * se + 1e-9);
  }
}

}  // TEST_SUITE
