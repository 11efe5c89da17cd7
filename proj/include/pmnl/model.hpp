#pragma once

// Generative model: MNL choice probabilities, log-linear Poisson arrival
// rates, and the expected-revenue functionals built from them.

#include <string>
#include <string_view>
#include <vector>

#include "pmnl/linalg.hpp"

namespace pmnl {

/// Feasible price box [low, high], 0 < low < high.
struct PriceBounds {
  double low = 0.0;
  double high = 0.0;

  bool operator==(const PriceBounds&) const = default;
};

/// Product features observed at the start of a period; row j is z_j.
struct ProductFeatures {
  Mat z;
  long period = 0;

  int num_products() const { return static_cast<int>(z.rows()); }
  int dim() const { return static_cast<int>(z.cols()); }
};

/// An assortment (distinct product indices, 0-based, kept in ascending order)
/// plus a full price vector. Products outside the assortment carry p_high.
struct Action {
  std::vector<int> assortment;
  Vec prices;

  int size() const { return static_cast<int>(assortment.size()); }
  bool operator==(const Action& other) const {
    return assortment == other.assortment && prices.size() == other.prices.size() &&
           prices == other.prices;
  }
};

/// Builds an action, sorting the assortment and filling out-of-assortment
/// prices with `bounds.high`. `in_prices` is aligned with `assortment`.
Action make_action(std::vector<int> assortment, const std::vector<double>& in_prices,
                   int num_products, const PriceBounds& bounds);

/// Checks |S| = K, distinct in-range indices, and every price inside the box.
void validate_action(const Action& action, int num_products, int assortment_size,
                     const PriceBounds& bounds);

/// Checks every feature row has Euclidean norm <= 1 + tol.
void validate_features(const ProductFeatures& features, double tol = 1e-12);

enum class BasisKind {
  Constant,             // x = empty, lambda = 1
  PriceVariety,         // x_i = -log(p_i / p_h) 1{i in S}
  Pairwise,             // (1/p_i 1{i in S}, p_i/p_j 1{i,j in S, i != j})
  FeatureAugmented,     // (-sum log p_j, sum_j sum_d log(a z_jd + b))
  AssortmentIndicator,  // x_i = scale / sqrt(K) for i in S intersect [d_x]
};

std::string_view to_string(BasisKind kind);
BasisKind basis_kind_from_string(std::string_view name);

/// Sufficient statistic x(S, p) of the log-linear arrival model.
class ArrivalBasis {
 public:
  static ArrivalBasis constant();
  static ArrivalBasis price_variety(int num_products, double price_high);
  static ArrivalBasis pairwise(int num_products);
  static ArrivalBasis feature_augmented(double a, double b);
  static ArrivalBasis assortment_indicator(int dim_x, double scale, int assortment_size);

  BasisKind kind() const { return kind_; }
  std::string_view id() const { return to_string(kind_); }
  int dim() const;

  double a() const { return a_; }
  double b() const { return b_; }
  double price_high() const { return price_high_; }
  double scale() const { return scale_; }
  int num_products() const { return num_products_; }
  int assortment_size() const { return assortment_size_; }
  int indicator_dim() const { return dim_x_; }

  /// Writes x(S, p) into `out` (resized to dim()).
  void evaluate_into(const Action& action, const ProductFeatures& features, Vec& out) const;
  Vec evaluate(const Action& action, const ProductFeatures& features) const;

  /// Upper bound on ||x(S, p)||_2 over feasible actions, given assortment
  /// size, price box and a per-coordinate feature box [z_low, z_high]^dim_z.
  double norm_bound(int assortment_size, const PriceBounds& bounds, int dim_z, double z_low,
                    double z_high) const;

  /// Same basis with the feature-augmented slope rescaled (a -> a * factor).
  ArrivalBasis with_feature_scale(double factor) const;

  bool operator==(const ArrivalBasis&) const = default;

 private:
  BasisKind kind_ = BasisKind::Constant;
  int num_products_ = 0;
  int dim_x_ = 0;
  int assortment_size_ = 0;
  double price_high_ = 0.0;
  double a_ = 0.0;
  double b_ = 0.0;
  double scale_ = 0.0;
};

Vec basis_price_variety(const Action& action, int num_products, double price_high);
Vec basis_pairwise(const Action& action, int num_products);
Vec basis_feature_augmented(const Action& action, const ProductFeatures& features, double a,
                            double b);

/// Ground-truth or estimated parameters plus the bound metadata.
struct ModelParams {
  Vec theta;
  Vec v;
  double base_rate = 1.0;  // Lambda
  double x_bar = 1.0;
  double v_bar = 1.0;
  PriceBounds prices;
  ArrivalBasis basis;
};

/// Exponents beyond this magnitude raise NumericOverflow.
inline constexpr double kMaxExponent = 700.0;

/// Mean utilities v^T z_j for every product (unpriced).
Vec product_scores(const ProductFeatures& features, const Vec& v);

/// Choice probabilities from precomputed scores: index 0 = no purchase,
/// index k+1 = assortment[k].
void choice_probabilities_into(const Action& action, const Vec& scores, Vec& out);

/// q_0, q_j for j in S (in assortment order).
Vec choice_probabilities(const Action& action, const ProductFeatures& features, const Vec& v);

/// exp(theta^T x(S, p)).
double arrival_rate(const Action& action, const ProductFeatures& features, const Vec& theta,
                    const ArrivalBasis& basis);

/// sum_{j in S} p_j q_j.
double per_customer_revenue(const Action& action, const ProductFeatures& features, const Vec& v);
double per_customer_revenue_from_scores(const Action& action, const Vec& scores);

/// Lambda * lambda(S, p; theta) * r(S, p, z; v).
double expected_period_revenue(const Action& action, const ProductFeatures& features,
                               const ModelParams& params);

/// oracle_value - expected_period_revenue(chosen).
double instantaneous_regret(const Action& chosen, const ModelParams& params,
                            const ProductFeatures& features, double oracle_value);

}  // namespace pmnl
