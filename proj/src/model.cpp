#include "pmnl/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmnl/errors.hpp"

namespace pmnl {

Action make_action(std::vector<int> assortment, const std::vector<double>& in_prices,
                   int num_products, const PriceBounds& bounds) {
  if (assortment.size() != in_prices.size()) {
    throw InvalidInput("make_action: assortment and price list differ in length");
  }
  std::vector<std::pair<int, double>> pairs;
  pairs.reserve(assortment.size());
  for (std::size_t k = 0; k < assortment.size(); ++k) pairs.emplace_back(assortment[k], in_prices[k]);
  std::sort(pairs.begin(), pairs.end());

  Action action;
  action.prices = Vec::Constant(num_products, bounds.high);
  for (const auto& [j, p] : pairs) {
    if (j < 0 || j >= num_products) throw InvalidInput("make_action: product index out of range");
    if (!action.assortment.empty() && action.assortment.back() == j) {
      throw InvalidInput("make_action: duplicate product index");
    }
    action.assortment.push_back(j);
    action.prices(j) = p;
  }
  return action;
}

void validate_action(const Action& action, int num_products, int assortment_size,
                     const PriceBounds& bounds) {
  if (action.size() != assortment_size) {
    std::ostringstream os;
    os << "assortment has " << action.size() << " products, expected K = " << assortment_size;
    throw InvalidInput(os.str());
  }
  if (action.prices.size() != num_products) {
    throw InvalidInput("price vector length differs from the number of products");
  }
  for (std::size_t k = 0; k < action.assortment.size(); ++k) {
    const int j = action.assortment[k];
    if (j < 0 || j >= num_products) throw InvalidInput("assortment index out of range");
    if (k > 0 && action.assortment[k - 1] >= j) {
      throw InvalidInput("assortment must hold distinct indices in ascending order");
    }
  }
  for (Eigen::Index j = 0; j < action.prices.size(); ++j) {
    const double p = action.prices(j);
    if (!(p >= bounds.low && p <= bounds.high)) {
      std::ostringstream os;
      os << "price " << p << " of product " << j << " outside [" << bounds.low << ", "
         << bounds.high << "]";
      throw InvalidInput(os.str());
    }
  }
}

void validate_features(const ProductFeatures& features, double tol) {
  for (Eigen::Index j = 0; j < features.z.rows(); ++j) {
    if (features.z.row(j).norm() > 1.0 + tol) {
      std::ostringstream os;
      os << "feature vector of product " << j << " has norm " << features.z.row(j).norm()
         << " > 1";
      throw InvalidInput(os.str());
    }
  }
}

std::string_view to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Constant: return "constant";
    case BasisKind::PriceVariety: return "price_variety";
    case BasisKind::Pairwise: return "pairwise";
    case BasisKind::FeatureAugmented: return "feature_augmented";
    case BasisKind::AssortmentIndicator: return "assortment_indicator";
  }
  return "unknown";
}

BasisKind basis_kind_from_string(std::string_view name) {
  for (auto kind : {BasisKind::Constant, BasisKind::PriceVariety, BasisKind::Pairwise,
                    BasisKind::FeatureAugmented, BasisKind::AssortmentIndicator}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidInput("unknown arrival basis '" + std::string(name) + "'");
}

ArrivalBasis ArrivalBasis::constant() { return ArrivalBasis{}; }

ArrivalBasis ArrivalBasis::price_variety(int num_products, double price_high) {
  if (num_products <= 0) throw InvalidInput("price_variety basis: N must be positive");
  if (!(price_high > 0.0)) throw InvalidInput("price_variety basis: p_h must be positive");
  ArrivalBasis basis;
  basis.kind_ = BasisKind::PriceVariety;
  basis.num_products_ = num_products;
  basis.price_high_ = price_high;
  return basis;
}

ArrivalBasis ArrivalBasis::pairwise(int num_products) {
  if (num_products <= 0) throw InvalidInput("pairwise basis: N must be positive");
  ArrivalBasis basis;
  basis.kind_ = BasisKind::Pairwise;
  basis.num_products_ = num_products;
  return basis;
}

ArrivalBasis ArrivalBasis::feature_augmented(double a, double b) {
  ArrivalBasis basis;
  basis.kind_ = BasisKind::FeatureAugmented;
  basis.a_ = a;
  basis.b_ = b;
  return basis;
}

ArrivalBasis ArrivalBasis::assortment_indicator(int dim_x, double scale, int assortment_size) {
  if (dim_x <= 0 || assortment_size <= 0) {
    throw InvalidInput("assortment_indicator basis: d_x and K must be positive");
  }
  ArrivalBasis basis;
  basis.kind_ = BasisKind::AssortmentIndicator;
  basis.dim_x_ = dim_x;
  basis.scale_ = scale;
  basis.assortment_size_ = assortment_size;
  return basis;
}

int ArrivalBasis::dim() const {
  switch (kind_) {
    case BasisKind::Constant: return 0;
    case BasisKind::PriceVariety: return num_products_;
    case BasisKind::Pairwise: return num_products_ + num_products_ * (num_products_ - 1);
    case BasisKind::FeatureAugmented: return 2;
    case BasisKind::AssortmentIndicator: return dim_x_;
  }
  return 0;
}

void ArrivalBasis::evaluate_into(const Action& action, const ProductFeatures& features,
                                 Vec& out) const {
  out.setZero(dim());
  switch (kind_) {
    case BasisKind::Constant:
      return;
    case BasisKind::PriceVariety:
      if (action.prices.size() != num_products_) {
        throw InvalidInput("price_variety basis: price vector length differs from N");
      }
      for (int j : action.assortment) out(j) = -std::log(action.prices(j) / price_high_);
      return;
    case BasisKind::Pairwise: {
      const int n = num_products_;
      if (action.prices.size() != n) {
        throw InvalidInput("pairwise basis: price vector length differs from N");
      }
      for (int i : action.assortment) {
        if (!(action.prices(i) > 0.0)) throw InvalidInput("pairwise basis: price must be positive");
        out(i) = 1.0 / action.prices(i);
      }
      for (int i : action.assortment) {
        for (int j : action.assortment) {
          if (i == j) continue;
          const int offset = i * (n - 1) + (j < i ? j : j - 1);
          out(n + offset) = action.prices(i) / action.prices(j);
        }
      }
      return;
    }
    case BasisKind::FeatureAugmented: {
      double price_term = 0.0;
      double feature_term = 0.0;
      for (int j : action.assortment) {
        price_term -= std::log(action.prices(j));
        for (Eigen::Index d = 0; d < features.z.cols(); ++d) {
          const double arg = a_ * features.z(j, d) + b_;
          if (!(arg > 0.0)) {
            throw InvalidInput("feature_augmented basis: a*z + b must be positive");
          }
          feature_term += std::log(arg);
        }
      }
      out(0) = price_term;
      out(1) = feature_term;
      return;
    }
    case BasisKind::AssortmentIndicator: {
      const double value = scale_ / std::sqrt(static_cast<double>(assortment_size_));
      for (int j : action.assortment) {
        if (j < dim_x_) out(j) = value;
      }
      return;
    }
  }
}

Vec ArrivalBasis::evaluate(const Action& action, const ProductFeatures& features) const {
  Vec out;
  evaluate_into(action, features, out);
  return out;
}

double ArrivalBasis::norm_bound(int assortment_size, const PriceBounds& bounds, int dim_z,
                                double z_low, double z_high) const {
  const double k = assortment_size;
  switch (kind_) {
    case BasisKind::Constant:
      return 0.0;
    case BasisKind::PriceVariety: {
      const double worst = std::max(std::abs(std::log(bounds.low / price_high_)),
                                    std::abs(std::log(bounds.high / price_high_)));
      return std::sqrt(k) * worst;
    }
    case BasisKind::Pairwise: {
      const double ratio = bounds.high / bounds.low;
      return std::sqrt(k / (bounds.low * bounds.low) + k * (k - 1) * ratio * ratio);
    }
    case BasisKind::FeatureAugmented: {
      const double price_part =
          k * std::max(std::abs(std::log(bounds.low)), std::abs(std::log(bounds.high)));
      const double lo = a_ * z_low + b_;
      const double hi = a_ * z_high + b_;
      if (!(lo > 0.0 && hi > 0.0)) {
        throw InvalidInput("feature_augmented basis: a*z + b must be positive on the feature box");
      }
      const double feature_part =
          k * dim_z * std::max(std::abs(std::log(lo)), std::abs(std::log(hi)));
      return std::hypot(price_part, feature_part);
    }
    case BasisKind::AssortmentIndicator:
      return scale_ * std::sqrt(std::min(k, static_cast<double>(dim_x_)) / k);
  }
  return 0.0;
}

ArrivalBasis ArrivalBasis::with_feature_scale(double factor) const {
  ArrivalBasis out = *this;
  out.a_ *= factor;
  return out;
}

Vec basis_price_variety(const Action& action, int num_products, double price_high) {
  return ArrivalBasis::price_variety(num_products, price_high).evaluate(action, ProductFeatures{});
}

Vec basis_pairwise(const Action& action, int num_products) {
  return ArrivalBasis::pairwise(num_products).evaluate(action, ProductFeatures{});
}

Vec basis_feature_augmented(const Action& action, const ProductFeatures& features, double a,
                            double b) {
  return ArrivalBasis::feature_augmented(a, b).evaluate(action, features);
}

Vec product_scores(const ProductFeatures& features, const Vec& v) {
  if (features.z.cols() != v.size()) {
    std::ostringstream os;
    os << "feature dimension " << features.z.cols() << " differs from parameter dimension "
       << v.size();
    throw InvalidInput(os.str());
  }
  return features.z * v;
}

void choice_probabilities_into(const Action& action, const Vec& scores, Vec& out) {
  const int k = action.size();
  out.resize(k + 1);
  double shift = 0.0;
  for (int idx = 0; idx < k; ++idx) {
    const int j = action.assortment[idx];
    if (j < 0 || j >= scores.size()) throw InvalidInput("assortment index out of range");
    const double u = scores(j) - action.prices(j);
    if (!std::isfinite(u) || std::abs(u) > kMaxExponent) {
      throw NumericOverflow("choice utility exponent outside [-700, 700]");
    }
    out(idx + 1) = u;
    shift = std::max(shift, u);
  }
  // Shifted log-sum-exp: the outside option has utility 0.
  double denom = std::exp(-shift);
  out(0) = denom;
  for (int idx = 1; idx <= k; ++idx) {
    out(idx) = std::exp(out(idx) - shift);
    denom += out(idx);
  }
  out /= denom;
}

Vec choice_probabilities(const Action& action, const ProductFeatures& features, const Vec& v) {
  if (action.prices.size() != features.z.rows()) {
    throw InvalidInput("price vector length differs from the number of feature rows");
  }
  Vec out;
  choice_probabilities_into(action, product_scores(features, v), out);
  return out;
}

double arrival_rate(const Action& action, const ProductFeatures& features, const Vec& theta,
                    const ArrivalBasis& basis) {
  if (basis.dim() != theta.size()) {
    std::ostringstream os;
    os << "arrival basis dimension " << basis.dim() << " differs from theta dimension "
       << theta.size();
    throw InvalidInput(os.str());
  }
  if (theta.size() == 0) return 1.0;
  const double exponent = theta.dot(basis.evaluate(action, features));
  if (!std::isfinite(exponent) || std::abs(exponent) > kMaxExponent) {
    throw NumericOverflow("arrival-rate exponent outside [-700, 700]");
  }
  return std::exp(exponent);
}

double per_customer_revenue_from_scores(const Action& action, const Vec& scores) {
  Vec q;
  choice_probabilities_into(action, scores, q);
  double revenue = 0.0;
  for (int idx = 0; idx < action.size(); ++idx) {
    revenue += action.prices(action.assortment[idx]) * q(idx + 1);
  }
  return revenue;
}

double per_customer_revenue(const Action& action, const ProductFeatures& features, const Vec& v) {
  return per_customer_revenue_from_scores(action, product_scores(features, v));
}

double expected_period_revenue(const Action& action, const ProductFeatures& features,
                               const ModelParams& params) {
  return params.base_rate * arrival_rate(action, features, params.theta, params.basis) *
         per_customer_revenue(action, features, params.v);
}

double instantaneous_regret(const Action& chosen, const ModelParams& params,
                            const ProductFeatures& features, double oracle_value) {
  return oracle_value - expected_period_revenue(chosen, features, params);
}

}  // namespace pmnl
