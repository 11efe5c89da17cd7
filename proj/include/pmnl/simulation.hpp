#pragma once

// Seeded environment, episode loop, Monte-Carlo aggregation and CSV output.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmnl/errors.hpp"
#include "pmnl/policy.hpp"
#include "pmnl/rng.hpp"

namespace pmnl {

struct FeatureModel {
  enum class Kind { Fixed, Uniform };
  Kind kind = Kind::Fixed;
  Mat fixed;  // N x d_z, used when kind == Fixed
  int num_products = 0;
  int dim = 0;
  double low = 0.0;
  double high = 1.0;
  double scale = 1.0;  // every drawn vector is divided by this

  static FeatureModel fixed_features(Mat z);
  static FeatureModel uniform(int num_products, int dim, double low, double high);

  ProductFeatures draw(Rng& rng, long period) const;
  /// Expected feature matrix (after scaling).
  Mat mean() const;
  /// Per-coordinate variance of the scaled draw (0 for fixed features).
  double coordinate_variance() const;
  /// Largest possible feature norm (after scaling).
  double max_norm() const;
};

struct Environment {
  ModelParams truth;
  FeatureModel features;
  int assortment_size = 1;
  SearchConfig search;
};

/// n ~ Poisson(Lambda lambda), then a multinomial split over {no purchase} + S.
PeriodObservation simulate_period(const Environment& env, const Action& action,
                                  const ProductFeatures& features, Rng& rng, long period);

/// Feature sequence and per-period oracle shared by every policy of a replication.
struct EpisodeContext {
  std::vector<ProductFeatures> features;
  std::vector<ScoredAction> oracle;
};

EpisodeContext prepare_episode(const Environment& env, long horizon, Rng& feature_rng);

struct RegretTrace {
  std::string policy;
  std::string scenario;
  std::uint64_t seed = 0;
  long replication = 0;
  std::vector<double> oracle_revenue;
  std::vector<double> policy_revenue;
  std::vector<double> realized_revenue;
  std::vector<double> cumulative_regret;
  std::vector<Action> actions;

  long length() const { return static_cast<long>(oracle_revenue.size()); }
};

/// Raised when a policy fails mid-episode; carries the partial trace.
class EpisodeFailure : public Error {
 public:
  EpisodeFailure(const std::string& what, RegretTrace partial, long period)
      : Error(what), partial_(std::move(partial)), period_(period) {}
  const RegretTrace& partial() const { return partial_; }
  long period() const { return period_; }

 private:
  RegretTrace partial_;
  long period_;
};

using DiagnosticsSink = std::function<void(const PeriodDiagnostics&)>;

RegretTrace run_episode(Policy& policy, const Environment& env, const EpisodeContext& context,
                        Rng& outcome_rng, const DiagnosticsSink& sink = {});

/// Linear-interpolation percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

struct Bands {
  std::vector<double> mean;
  std::vector<double> p10;
  std::vector<double> p90;
};

/// Per-period mean / p10 / p90 across equally long series.
Bands aggregate(const std::vector<std::vector<double>>& series);

/// Median of the in-assortment prices chosen over periods [from, to).
double median_chosen_price(const RegretTrace& trace, long from, long to);

void write_trace_csv(std::ostream& out, const RegretTrace& trace);
void write_bands_csv(std::ostream& out, const Bands& bands);
/// Shortest round-trip decimal form; used by every CSV writer.
std::string format_number(double value);

}  // namespace pmnl
