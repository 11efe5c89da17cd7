#include "pmnl/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pmnl/errors.hpp"

namespace pmnl {

std::vector<double> price_grid(const PriceBounds& bounds, int points) {
  if (points < 1) throw InvalidInput("price grid needs at least one point");
  if (points == 1) return {bounds.high};
  std::vector<double> grid(points);
  const double step = (bounds.high - bounds.low) / (points - 1);
  for (int g = 0; g < points; ++g) grid[g] = bounds.low + step * g;
  grid.back() = bounds.high;
  return grid;
}

std::int64_t num_combinations(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    const std::int64_t num = n - k + i;
    if (result > std::numeric_limits<std::int64_t>::max() / num) {
      return std::numeric_limits<std::int64_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

std::vector<std::vector<int>> enumerate_assortments(int num_products, int assortment_size) {
  std::vector<std::vector<int>> out;
  if (assortment_size < 0 || assortment_size > num_products) return out;
  std::vector<int> current(assortment_size);
  std::iota(current.begin(), current.end(), 0);
  while (true) {
    out.push_back(current);
    int i = assortment_size - 1;
    while (i >= 0 && current[i] == num_products - assortment_size + i) --i;
    if (i < 0) break;
    ++current[i];
    for (int j = i + 1; j < assortment_size; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

namespace {

std::int64_t int_pow_saturating(std::int64_t base, int exp) {
  std::int64_t result = 1;
  for (int i = 0; i < exp; ++i) {
    if (result > std::numeric_limits<std::int64_t>::max() / base) {
      return std::numeric_limits<std::int64_t>::max();
    }
    result *= base;
  }
  return result;
}

void refine_prices(Action& action, double& value, const PriceBounds& bounds, double step,
                   const SearchConfig& config, const ActionObjective& objective) {
  constexpr double kInvPhi = 0.6180339887498949;
  for (int sweep = 0; sweep < config.refine_sweeps; ++sweep) {
    for (int j : action.assortment) {
      const double original = action.prices(j);
      double lo = std::max(bounds.low, original - step);
      double hi = std::min(bounds.high, original + step);
      double x1 = hi - kInvPhi * (hi - lo);
      double x2 = lo + kInvPhi * (hi - lo);
      action.prices(j) = x1;
      double f1 = objective(action);
      action.prices(j) = x2;
      double f2 = objective(action);
      for (int it = 0; it < 60 && hi - lo > 1e-10 * (1.0 + std::abs(hi)); ++it) {
        if (f1 >= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - kInvPhi * (hi - lo);
          action.prices(j) = x1;
          f1 = objective(action);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + kInvPhi * (hi - lo);
          action.prices(j) = x2;
          f2 = objective(action);
        }
      }
      const double candidate = f1 >= f2 ? x1 : x2;
      const double candidate_value = std::max(f1, f2);
      if (candidate_value > value) {
        action.prices(j) = candidate;
        value = candidate_value;
      } else {
        action.prices(j) = original;
      }
    }
  }
}

}  // namespace

ScoredAction maximize_prices(const std::vector<int>& assortment, int num_products,
                             const PriceBounds& bounds, const SearchConfig& config,
                             const ActionObjective& objective) {
  const auto grid = price_grid(bounds, config.grid_points);
  const int points = static_cast<int>(grid.size());
  const int k = static_cast<int>(assortment.size());

  Action action;
  action.assortment = assortment;
  action.prices = Vec::Constant(num_products, bounds.high);

  ScoredAction best;
  best.value = -std::numeric_limits<double>::infinity();

  if (int_pow_saturating(points, k) <= config.price_enumeration_limit) {
    std::vector<int> idx(k, 0);
    while (true) {
      for (int i = 0; i < k; ++i) action.prices(assortment[i]) = grid[idx[i]];
      const double value = objective(action);
      if (value > best.value) {
        best.value = value;
        best.action = action;
      }
      int i = k - 1;
      while (i >= 0 && idx[i] == points - 1) idx[i--] = 0;
      if (i < 0) break;
      ++idx[i];
    }
  } else {
    int start = 0;
    for (int g = 0; g < points; ++g) {
      for (int j : assortment) action.prices(j) = grid[g];
      const double value = objective(action);
      if (value > best.value) {
        best.value = value;
        start = g;
      }
    }
    std::vector<int> idx(k, start);
    for (int i = 0; i < k; ++i) action.prices(assortment[i]) = grid[start];
    double current = best.value;
    for (int sweep = 0; sweep < config.max_coordinate_sweeps; ++sweep) {
      bool moved = false;
      for (int i = 0; i < k; ++i) {
        const int j = assortment[i];
        int best_g = idx[i];
        double best_v = current;
        for (int g = 0; g < points; ++g) {
          if (g == idx[i]) continue;
          action.prices(j) = grid[g];
          const double value = objective(action);
          if (value > best_v) {
            best_v = value;
            best_g = g;
          }
        }
        action.prices(j) = grid[best_g];
        if (best_g != idx[i]) {
          idx[i] = best_g;
          current = best_v;
          moved = true;
        }
      }
      if (!moved) break;
    }
    best.action = action;
    best.value = current;
  }

  if (config.refine && points > 1) {
    refine_prices(best.action, best.value, bounds, grid[1] - grid[0], config, objective);
  }
  return best;
}

ScoredAction maximize_over_actions(int num_products, int assortment_size,
                                   const PriceBounds& bounds, const SearchConfig& config,
                                   const ActionObjective& objective, const Vec& seed_scores) {
  if (assortment_size < 1 || assortment_size > num_products) {
    std::ostringstream os;
    os << "assortment size K = " << assortment_size << " must lie in [1, N = " << num_products
       << "]";
    throw InvalidInput(os.str());
  }
  const std::int64_t count = num_combinations(num_products, assortment_size);
  if (count <= config.assortment_limit) {
    ScoredAction best;
    best.value = -std::numeric_limits<double>::infinity();
    for (const auto& assortment : enumerate_assortments(num_products, assortment_size)) {
      auto candidate = maximize_prices(assortment, num_products, bounds, config, objective);
      if (candidate.value > best.value) best = std::move(candidate);
    }
    return best;
  }
  if (!config.heuristic_assortments) {
    std::ostringstream os;
    os << "C(" << num_products << ", " << assortment_size << ") = " << count
       << " assortments exceed the enumeration limit " << config.assortment_limit
       << "; enable heuristic assortment search";
    throw CapacityError(os.str());
  }

  std::vector<int> order(num_products);
  std::iota(order.begin(), order.end(), 0);
  if (seed_scores.size() == num_products) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return seed_scores(a) > seed_scores(b); });
  }
  std::vector<int> current(order.begin(), order.begin() + assortment_size);
  std::sort(current.begin(), current.end());
  auto best = maximize_prices(current, num_products, bounds, config, objective);
  for (int round = 0; round < 1000; ++round) {
    bool improved = false;
    for (int pos = 0; pos < assortment_size && !improved; ++pos) {
      for (int j = 0; j < num_products && !improved; ++j) {
        if (std::binary_search(current.begin(), current.end(), j)) continue;
        auto swapped = current;
        swapped[pos] = j;
        std::sort(swapped.begin(), swapped.end());
        auto candidate = maximize_prices(swapped, num_products, bounds, config, objective);
        if (candidate.value > best.value) {
          best = std::move(candidate);
          current = std::move(swapped);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return best;
}

ScoredAction oracle_best_action(const ModelParams& params, const ProductFeatures& features,
                                int assortment_size, const SearchConfig& config) {
  const Vec scores = product_scores(features, params.v);
  Vec x;
  const ActionObjective objective = [&](const Action& action) {
    double log_rate = 0.0;
    if (params.theta.size() > 0) {
      params.basis.evaluate_into(action, features, x);
      log_rate = params.theta.dot(x);
      if (std::abs(log_rate) > kMaxExponent) {
        throw NumericOverflow("arrival-rate exponent outside [-700, 700]");
      }
    }
    return params.base_rate * std::exp(log_rate) *
           per_customer_revenue_from_scores(action, scores);
  };
  return maximize_over_actions(features.num_products(), assortment_size, params.prices, config,
                               objective, scores);
}

}  // namespace pmnl
