#pragma once

// Log-likelihoods, information matrices and ball-constrained MLE for the
// Poisson arrival model and the MNL choice model.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pmnl/model.hpp"

namespace pmnl {

/// One period of data. `purchases` is aligned with `action.assortment`.
struct PeriodObservation {
  long period = 0;
  Action action;
  ProductFeatures features;
  long arrivals = 0;
  std::vector<long> purchases;
  long no_purchase = 0;

  bool operator==(const PeriodObservation& other) const;
};

/// Throws InvalidInput unless counts are nonnegative and sum to `arrivals`.
void validate_observation(const PeriodObservation& observation);

/// Append-only, strictly increasing period index.
class History {
 public:
  void append(PeriodObservation observation);

  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }
  const PeriodObservation& operator[](std::size_t i) const { return observations_[i]; }
  const PeriodObservation& back() const { return observations_.back(); }
  auto begin() const { return observations_.begin(); }
  auto end() const { return observations_.end(); }

  /// FNV-1a over every numeric field.
  std::uint64_t hash() const;

 private:
  std::vector<PeriodObservation> observations_;
};

/// Per-period arrival statistics: x_s and n_s.
struct PoissonData {
  double base_rate = 1.0;
  std::vector<Vec> x;
  std::vector<double> arrivals;

  void add(const Vec& xs, double n) {
    x.push_back(xs);
    arrivals.push_back(n);
  }
  std::size_t size() const { return x.size(); }
};

/// In-assortment feature rows, prices and purchase counts of one period.
struct ChoicePeriod {
  Mat z;  // K x d_z
  Vec prices;
  Vec counts;
  double arrivals = 0.0;
};

struct ChoiceData {
  std::vector<ChoicePeriod> periods;

  void add(const PeriodObservation& observation);
  std::size_t size() const { return periods.size(); }
};

PoissonData poisson_data(const History& history, const ArrivalBasis& basis, double base_rate);
ChoiceData choice_data(const History& history);
ChoicePeriod choice_period(const Action& action, const ProductFeatures& features);

/// sum_s [n_s theta^T x_s - Lambda exp(theta^T x_s)].
double poisson_loglik(const Vec& theta, const PoissonData& data);
Vec poisson_loglik_grad(const Vec& theta, const PoissonData& data);
/// I^Poi(theta) = sum_s Lambda lambda_s x_s x_s^T, the negative Hessian.
Mat poisson_information(const Vec& theta, const PoissonData& data);

double poisson_loglik(const Vec& theta, const History& history, const ArrivalBasis& basis,
                      double base_rate);
Vec poisson_loglik_grad(const Vec& theta, const History& history, const ArrivalBasis& basis,
                        double base_rate);

/// sum_s sum_{j in S_s and 0} count_j log q_s(j; v).
double mnl_loglik(const Vec& v, const ChoiceData& data);
Vec mnl_loglik_grad(const Vec& v, const ChoiceData& data);
/// sum_s n_s phi_s(v), the negative Hessian.
Mat mnl_neg_hessian(const Vec& v, const ChoiceData& data);

double mnl_loglik(const Vec& v, const History& history);
Vec mnl_loglik_grad(const Vec& v, const History& history);

/// sum_j q_j z_j z_j^T - (sum_j q_j z_j)(sum_j q_j z_j)^T.
Mat phi_matrix(const Action& action, const ProductFeatures& features, const Vec& v);
Mat phi_matrix(const ChoicePeriod& period, const Vec& v);

/// Accumulated information matrices. Raw (x_s, choice rows) are retained so
/// the matrices can be re-evaluated at fresh estimates.
class FisherState {
 public:
  FisherState() = default;
  FisherState(int dim_x, int dim_z, double base_rate, double x_bar);

  /// Rebuilds a state from its serialized parts without re-evaluating anything.
  static FisherState restore(int dim_x, int dim_z, double base_rate, double x_bar,
                             std::vector<Vec> xs, std::vector<ChoicePeriod> choices, Mat poisson,
                             Mat mnl_hat);

  /// Adds Lambda lambda(theta_hat) x x^T to I_poi and Lambda e^{-x_bar} phi(v_hat)
  /// to I_mnl_hat.
  void accumulate(const Vec& x, const ChoicePeriod& choice, const Vec& theta_hat,
                  const Vec& v_hat);
  void accumulate(const PeriodObservation& observation, const ArrivalBasis& basis,
                  const Vec& theta_hat, const Vec& v_hat);

  /// Rebuilds both matrices with every summand evaluated at (theta_hat, v_hat).
  void recompute(const Vec& theta_hat, const Vec& v_hat);

  /// I^MNL(v) = sum_s Lambda lambda(theta) phi_s(v), theta being the true arrival
  /// parameter (available only in simulation).
  Mat mnl_exact(const Vec& v, const Vec& theta) const;
  /// Same surrogate as mnl_hat() but evaluated at an arbitrary v.
  Mat mnl_hat_at(const Vec& v) const;

  const Mat& poisson() const { return poisson_; }
  const Mat& mnl_hat() const { return mnl_hat_; }
  long periods() const { return static_cast<long>(xs_.size()); }
  int dim_x() const { return dim_x_; }
  int dim_z() const { return dim_z_; }
  double base_rate() const { return base_rate_; }
  double x_bar() const { return x_bar_; }
  const std::vector<Vec>& xs() const { return xs_; }
  const std::vector<ChoicePeriod>& choices() const { return choices_; }

 private:
  int dim_x_ = 0;
  int dim_z_ = 0;
  double base_rate_ = 1.0;
  double x_bar_ = 0.0;
  Mat poisson_;
  Mat mnl_hat_;
  std::vector<Vec> xs_;
  std::vector<ChoicePeriod> choices_;
};

/// Per-period upper surrogate Lambda e^{x_bar} phi(S, p, z; v).
Mat mnl_period_upper(const Action& action, const ProductFeatures& features, const Vec& v,
                     double base_rate, double x_bar);
/// Per-period exact M^MNL = Lambda lambda(theta) phi(S, p, z; v).
Mat mnl_period_exact(const Action& action, const ProductFeatures& features, const Vec& v,
                     const Vec& theta, const ArrivalBasis& basis, double base_rate);

struct SolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  double armijo = 1e-4;
  double shrink = 0.5;

  bool operator==(const SolverOptions&) const = default;
};

struct EstimationReport {
  Vec estimate;
  double loglik = 0.0;
  double grad_norm = 0.0;            // raw gradient norm at the solution
  double projected_grad_norm = 0.0;  // s ||P(w + g / s) - w||, s = max(1, gradient scale)
  double tolerance = 0.0;            // effective stopping threshold
  int iterations = 0;
  bool converged = false;
  bool on_boundary = false;
  // Stopped because the model's predicted gain fell below the rounding level
  // of the objective value.
  bool precision_limited = false;
};

/// Value, gradient, negative Hessian and a gradient magnitude scale.
struct Evaluation {
  double value = 0.0;
  Vec gradient;
  Mat neg_hessian;
  double scale = 1.0;
};

using ConcaveObjective = std::function<Evaluation(const Vec& w, bool with_hessian)>;

ConcaveObjective poisson_objective(const PoissonData& data);
ConcaveObjective mnl_objective(const ChoiceData& data);

/// Maximises a concave objective over {||w - center|| <= radius} starting at
/// `start` (projected into the ball).
EstimationReport maximize_in_ball(const ConcaveObjective& objective, const Vec& center,
                                  double radius, const Vec& start,
                                  const SolverOptions& options = {});

enum class LikelihoodKind { Poisson, Mnl };

/// Ball around the origin of the given radius.
EstimationReport global_mle(LikelihoodKind kind, const History& history, const ArrivalBasis& basis,
                            double base_rate, int dim, double radius,
                            const SolverOptions& options = {});

/// Ball around `center`; warm-started at `start` (defaults to center).
EstimationReport local_mle(LikelihoodKind kind, const History& history, const ArrivalBasis& basis,
                           double base_rate, const Vec& center, double radius,
                           const Vec& start = Vec(), const SolverOptions& options = {});

/// Euclidean projection onto the ball.
Vec project_to_ball(const Vec& w, const Vec& center, double radius);

}  // namespace pmnl
