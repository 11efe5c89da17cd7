#pragma once

// Canned experiment definitions, adversarial lattices and their file format.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmnl/simulation.hpp"

namespace pmnl {

struct TruthSpec {
  enum class VKind { Fixed, Uniform };
  Vec theta;
  VKind v_kind = VKind::Fixed;
  Vec v;               // VKind::Fixed
  double v_low = 0.0;  // VKind::Uniform, per coordinate
  double v_high = 1.0;
  bool fixed_across_reps = false;
};

enum class AdversarialKind { I, II, III };

std::string_view to_string(AdversarialKind kind);
AdversarialKind adversarial_kind_from_string(std::string_view name);

struct AdversarialInfo {
  AdversarialKind kind = AdversarialKind::I;
  double epsilon = 0.0;
  int d = 0;
  int k_bar = 0;
  std::vector<int> W;                // 0-based, subset of [0, d)
  std::vector<int> claimed_optimal;  // 0-based product indices, ascending
  bool degenerate = false;
};

struct Scenario {
  std::string name;
  std::string description;
  int num_products = 1;
  int assortment_size = 1;
  int dim_z = 1;
  PriceBounds prices{1.0, 2.0};
  double base_rate = 1.0;
  ArrivalBasis basis;
  TruthSpec truth;
  FeatureModel features;
  bool normalize_features = false;
  double v_bar = 1.0;
  std::optional<double> x_bar;  // derived from the basis norm bound when absent
  long horizon = 1000;
  int n_reps = 1;
  std::optional<long> stage1_length;
  std::optional<double> sigma0;
  std::optional<double> sigma1;
  SearchConfig search;
  double bonus_scale = 1.0;
  int refresh_every = 1;
  FisherMode fisher_mode = FisherMode::Exact;
  bool lte_d_optimal = false;
  std::optional<AdversarialInfo> adversarial;
};

Scenario scenario_sim1();
Scenario scenario_sim2();
/// theta* = (alpha, 0): arrivals respond to prices only.
Scenario price_only_variant(Scenario s);
/// theta* = 0: lambda = 1 for every action.
Scenario constant_rate_variant(Scenario s);

/// Lower-bound lattices. `dim` is d_z for I and II and d_x for III; W is drawn
/// uniformly from the K_bar-subsets of [d] with `seed` when not given.
Scenario adversarial_instance(AdversarialKind kind, int dim, int assortment_size,
                              int num_products, double epsilon,
                              std::optional<std::vector<int>> W = std::nullopt,
                              std::uint64_t seed = 0);

/// Names of the shipped scenarios, in listing order.
const std::vector<std::string>& shipped_scenario_names();
Scenario scenario_by_name(std::string_view name);

struct ValidationReport {
  std::vector<std::string> warnings;
  bool feature_norm_exception = false;
  double x_bar = 0.0;       // the bound in force
  double x_norm_bound = 0.0;  // the basis norm bound on the feasible set
};

/// Checks Assumptions 1-6; throws ConfigError naming the violated one. A
/// feature norm above 1 is reported as a flagged exception, not an error.
ValidationReport validate_scenario(const Scenario& s);

/// Features divided by their largest possible norm, basis slope rescaled so
/// the arrival model is unchanged. Identity when normalize_features is off.
Scenario effective_scenario(const Scenario& s);

double resolved_x_bar(const Scenario& s);

/// Ground truth and feature model for one replication.
Environment instantiate(const Scenario& s, std::uint64_t seed, long replication);
PolicyConfig make_policy_config(const Scenario& s);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(std::string_view text);
/// Resolves a shipped name or a file path.
Scenario load_scenario(const std::string& ref);

}  // namespace pmnl
