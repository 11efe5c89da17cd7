#pragma once

// The two-stage Poisson-MNL UCB policy: stage schedule, closed-form
// constants, the exploration design and the confidence-bound argmax.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmnl/estimation.hpp"
#include "pmnl/search.hpp"

namespace pmnl {

enum class FisherMode { Exact, Incremental };

struct PolicyConfig {
  long horizon = 1000;
  double base_rate = 1.0;
  double x_bar = 1.0;
  double v_bar = 1.0;
  double sigma0 = 0.0;  // <= 0: derived from the feature model and design
  double sigma1 = 0.0;  // <= 0: derived from the design Gram matrix
  int dim_z = 1;
  int dim_x = 0;
  int assortment_size = 1;
  int num_products = 1;
  PriceBounds prices{1.0, 2.0};
  ArrivalBasis basis;
  SearchConfig search;

  // Exploration design: reference features (rows = products) and price levels
  // per product for the candidate grid.
  Mat reference_features;
  int design_price_levels = 3;
  std::optional<long> stage1_length;  // overrides T0 when set
  double feature_variance = 0.0;      // per-coordinate variance of random features

  double bonus_scale = 1.0;
  int refresh_every = 1;
  FisherMode fisher_mode = FisherMode::Exact;
  SolverOptions solver;

  // Injected pilot estimates and radii (testing hooks).
  std::optional<Vec> pilot_theta;
  std::optional<Vec> pilot_v;
  std::optional<double> tau_theta_override;
  std::optional<double> tau_v_override;
};

/// Throws InvalidInput / ConfigError on inconsistent dimensions or bounds.
void validate_policy_config(const PolicyConfig& config);

struct StageSchedule {
  long t0 = 0;
  long T0 = 0;
};

StageSchedule compute_t0_T0(long horizon, int dim_z, int dim_x, double sigma0);
StageSchedule compute_t0_T0(const PolicyConfig& config);

struct PolicyConstants {
  double kappa = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
  double c8 = 0.0;
  double c0 = 0.0;
  double tau_theta_tilde = 0.0;
  double tau_v_tilde = 0.0;
  double tau_theta = 0.0;
  double tau_v = 0.0;
  double omega_theta = 0.0;
  double omega_v = 0.0;
};

double compute_c4(double base_rate, double x_bar);
double compute_kappa(double v_bar, const PriceBounds& prices, int assortment_size);
double compute_c5(double tau_v);
double compute_c8(double tau_v, double v_bar, const PriceBounds& prices, int assortment_size);
double compute_c0(double tau_v, double v_bar, const PriceBounds& prices, int assortment_size,
                  double base_rate);
double compute_omega_v(double tau_v, double c4, double c5, double c8, double x_bar, double horizon,
                       double base_rate, int dim_z);

PolicyConstants compute_constants(const PolicyConfig& config, long T0);

/// Deterministic exploration block: actions whose arrival statistics span
/// R^{d_x}, followed by actions that complete the MNL coverage.
struct InitialDesign {
  std::vector<Action> block;
  int rank_block = 0;        // leading actions used for the arrival span
  double gram_min_eig = 0.0;  // min eigenvalue of the span block Gram matrix
  int mnl_rank = 0;           // rank of the summed phi matrices at v = 0
};

InitialDesign build_initial_design(const PolicyConfig& config);
const Action& initial_action(const InitialDesign& design, long period);

/// sigma_0 and sigma_1 actually used (derived when the config leaves them unset).
double resolve_sigma0(const PolicyConfig& config, const InitialDesign& design);
double resolve_sigma1(const PolicyConfig& config, const InitialDesign& design);

struct UcbBreakdown {
  double plug_in = 0.0;
  double poisson_bonus = 0.0;
  double mnl_bonus = 0.0;
  double poisson_cap = 0.0;  // p_h * Lambda (e^x - e^-x)
  double mnl_cap = 0.0;      // Lambda e^x * p_h
  double poisson_gap = 0.0;  // poisson_bonus - poisson_cap, formed without cancellation
  double mnl_gap = 0.0;      // mnl_bonus - mnl_cap
  bool poisson_clamped = false;
  bool mnl_clamped = false;

  double value() const { return plug_in + poisson_bonus + mnl_bonus; }
  /// value() minus both caps; same argmax without the large constants.
  double shifted() const { return plug_in + poisson_gap + mnl_gap; }
};

struct PeriodDiagnostics {
  long period = 0;
  std::string stage;
  Vec theta_hat;
  Vec v_hat;
  double tau_theta = 0.0;
  double tau_v = 0.0;
  double omega_theta = 0.0;
  double omega_v = 0.0;
  Action action;
  UcbBreakdown ucb;
  bool theta_converged = true;
  bool v_converged = true;
  int theta_iterations = 0;
  int v_iterations = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual Action select(const ProductFeatures& features) = 0;
  virtual void update(const PeriodObservation& observation) = 0;
  virtual const PeriodDiagnostics& diagnostics() const { return diagnostics_; }

 protected:
  PeriodDiagnostics diagnostics_;
};

/// PMNL. With `fixed_arrival` the arrival model is dropped (lambda = 1, no
/// Poisson bonus) and the MNL constants use x_bar = 0.
class PmnlPolicy : public Policy {
 public:
  explicit PmnlPolicy(PolicyConfig config, bool fixed_arrival = false);

  std::string_view name() const override { return fixed_arrival_ ? "fixed_ucb" : "pmnl"; }
  Action select(const ProductFeatures& features) override;
  void update(const PeriodObservation& observation) override;

  enum class Stage { Explore, Ucb };
  Stage stage() const { return stage_; }
  long period() const { return static_cast<long>(history_.size()); }
  const StageSchedule& schedule() const { return schedule_; }
  const PolicyConstants& constants() const { return constants_; }
  const InitialDesign& design() const { return design_; }
  const History& history() const { return history_; }
  const FisherState& fisher() const { return fisher_; }
  const Vec& pilot_theta() const { return pilot_theta_; }
  const Vec& pilot_v() const { return pilot_v_; }
  const Vec& theta_hat() const { return theta_hat_; }
  const Vec& v_hat() const { return v_hat_; }
  const PolicyConfig& config() const { return config_; }

  /// Prepares the per-period quantities for ucb_value. Throws
  /// NeedsMoreExploration when an information matrix is singular.
  void prepare(const ProductFeatures& features);
  UcbBreakdown ucb_value(const Action& action) const;
  UcbBreakdown ucb_value(const Action& action, const ProductFeatures& features);

 private:
  void run_pilot();
  void run_local();

  PolicyConfig config_;
  bool fixed_arrival_;
  ArrivalBasis basis_;
  double x_bar_;
  int dim_x_;
  StageSchedule schedule_;
  PolicyConstants constants_;
  InitialDesign design_;
  Stage stage_ = Stage::Explore;

  History history_;
  PoissonData poisson_;
  ChoiceData choices_;
  FisherState fisher_;
  Vec pilot_theta_, pilot_v_;
  Vec theta_hat_, v_hat_;
  bool last_theta_converged_ = true, last_v_converged_ = true;
  int last_theta_iterations_ = 0, last_v_iterations_ = 0;

  // Per-period cache filled by prepare().
  Mat poisson_inverse_;
  Mat whitened_;  // rows w_j = I_hat^{-1/2} z_j
  Vec scores_;
  ProductFeatures prepared_features_;
  mutable Vec x_buffer_, q_buffer_;
};

/// Exploration for T0 periods (initial design or D-optimal greedy), then the
/// greedy plug-in maximiser under the current v MLE and a constant arrival rate.
class LearnThenEarnPolicy : public Policy {
 public:
  LearnThenEarnPolicy(PolicyConfig config, bool d_optimal);

  std::string_view name() const override { return "learn_then_earn"; }
  Action select(const ProductFeatures& features) override;
  void update(const PeriodObservation& observation) override;

  long exploration_length() const { return exploration_; }
  const Vec& v_hat() const { return v_hat_; }
  double rate_hat() const { return rate_hat_; }

 private:
  PolicyConfig config_;
  bool d_optimal_;
  InitialDesign design_;
  long exploration_ = 0;
  long period_ = 0;
  ChoiceData choices_;
  Mat information_;
  Vec v_hat_;
  double arrivals_total_ = 0.0;
  double rate_hat_ = 1.0;
};

class OraclePolicy : public Policy {
 public:
  OraclePolicy(ModelParams truth, int assortment_size, SearchConfig search);
  std::string_view name() const override { return "oracle"; }
  Action select(const ProductFeatures& features) override;
  void update(const PeriodObservation&) override {}

 private:
  ModelParams truth_;
  int assortment_size_;
  SearchConfig search_;
};

class Rng;

class RandomPolicy : public Policy {
 public:
  RandomPolicy(int num_products, int assortment_size, PriceBounds prices, SearchConfig search,
               std::uint64_t seed);
  ~RandomPolicy() override;
  std::string_view name() const override { return "random"; }
  Action select(const ProductFeatures& features) override;
  void update(const PeriodObservation&) override {}

 private:
  int num_products_;
  int assortment_size_;
  PriceBounds prices_;
  std::vector<double> grid_;
  std::vector<std::vector<int>> assortments_;
  std::unique_ptr<Rng> rng_;
};

/// Names accepted by make_policy, in listing order.
const std::vector<std::string>& policy_names();

struct PolicyContext {
  PolicyConfig config;
  ModelParams truth;       // used by the oracle only
  std::uint64_t seed = 0;  // used by the random policy only
  bool lte_d_optimal = false;
};

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyContext& context);

}  // namespace pmnl
