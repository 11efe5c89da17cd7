#pragma once

// Argmax machinery over (assortment, price vector) shared by the oracle and
// every policy.

#include <cstdint>
#include <functional>
#include <vector>

#include "pmnl/model.hpp"

namespace pmnl {

struct SearchConfig {
  int grid_points = 21;
  std::int64_t price_enumeration_limit = 10000;  // joint grid size enumerated exhaustively
  std::int64_t assortment_limit = 10000;
  bool heuristic_assortments = false;  // greedy swap search beyond assortment_limit
  bool refine = false;                 // golden-section polish after the grid
  int refine_sweeps = 3;
  int max_coordinate_sweeps = 100;

  bool operator==(const SearchConfig&) const = default;
};

struct ScoredAction {
  Action action;
  double value = 0.0;
};

using ActionObjective = std::function<double(const Action&)>;

std::vector<double> price_grid(const PriceBounds& bounds, int points);

/// n choose k, saturating at INT64_MAX.
std::int64_t num_combinations(int n, int k);

/// All K-subsets of [0, N) in lexicographic order.
std::vector<std::vector<int>> enumerate_assortments(int num_products, int assortment_size);

/// Best price vector for a fixed assortment. Exhaustive over the joint grid
/// when it is small enough, otherwise coordinate ascent on the grid.
ScoredAction maximize_prices(const std::vector<int>& assortment, int num_products,
                             const PriceBounds& bounds, const SearchConfig& config,
                             const ActionObjective& objective);

/// Best action over all assortments. `seed_scores` (per-product attractiveness)
/// seeds the heuristic when enumeration is disabled; it may be empty.
ScoredAction maximize_over_actions(int num_products, int assortment_size,
                                   const PriceBounds& bounds, const SearchConfig& config,
                                   const ActionObjective& objective,
                                   const Vec& seed_scores = Vec());

/// argmax of expected_period_revenue under `params`.
ScoredAction oracle_best_action(const ModelParams& params, const ProductFeatures& features,
                                int assortment_size, const SearchConfig& config);

}  // namespace pmnl
