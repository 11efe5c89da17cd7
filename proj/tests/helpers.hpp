#pragma once

#include <cmath>
#include <vector>

#include "pmnl/model.hpp"
#include "pmnl/rng.hpp"

namespace testing {

using namespace pmnl;

inline Vec random_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

/// Uniform direction scaled to a norm drawn from [0, radius].
inline Vec random_in_ball(Rng& rng, int n, double radius) {
  Vec v = random_vec(rng, n, -1.0, 1.0);
  const double norm = v.norm();
  if (norm > 0.0) v *= rng.uniform() * radius / norm;
  return v;
}

/// Rows of norm at most one.
inline ProductFeatures random_features(Rng& rng, int n, int d) {
  ProductFeatures f;
  f.z.resize(n, d);
  for (int j = 0; j < n; ++j) {
    Vec row = random_vec(rng, d, -1.0, 1.0);
    const double norm = row.norm();
    if (norm > 1.0) row /= norm;
    f.z.row(j) = row.transpose();
  }
  return f;
}

inline Action random_action(Rng& rng, int n, int k, const PriceBounds& bounds) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const int pick = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[pick]);
  }
  std::vector<int> s(pool.begin(), pool.begin() + k);
  std::vector<double> p(k);
  for (auto& x : p) x = rng.uniform(bounds.low, bounds.high);
  return make_action(s, p, n, bounds);
}

/// Direct MNL evaluation in extended precision; index 0 is no purchase.
inline std::vector<long double> mnl_oracle(const Action& a, const ProductFeatures& f, const Vec& v) {
  std::vector<long double> w;
  long double denom = 1.0L;
  for (int j : a.assortment) {
    long double u = 0.0L;
    for (int d = 0; d < f.dim(); ++d) u += static_cast<long double>(v(d)) * f.z(j, d);
    u -= a.prices(j);
    w.push_back(std::exp(u));
    denom += w.back();
  }
  std::vector<long double> q{1.0L / denom};
  for (auto x : w) q.push_back(x / denom);
  return q;
}

inline long double revenue_oracle(const Action& a, const ProductFeatures& f, const Vec& v) {
  const auto q = mnl_oracle(a, f, v);
  long double r = 0.0L;
  for (std::size_t i = 0; i < a.assortment.size(); ++i) r += a.prices(a.assortment[i]) * q[i + 1];
  return r;
}

}  // namespace testing
