#include "pmnl/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pmnl/errors.hpp"

namespace pmnl {

FeatureModel FeatureModel::fixed_features(Mat z) {
  FeatureModel m;
  m.kind = Kind::Fixed;
  m.num_products = static_cast<int>(z.rows());
  m.dim = static_cast<int>(z.cols());
  m.fixed = std::move(z);
  return m;
}

FeatureModel FeatureModel::uniform(int num_products, int dim, double low, double high) {
  if (!(low <= high)) throw InvalidInput("uniform features need low <= high");
  FeatureModel m;
  m.kind = Kind::Uniform;
  m.num_products = num_products;
  m.dim = dim;
  m.low = low;
  m.high = high;
  return m;
}

ProductFeatures FeatureModel::draw(Rng& rng, long period) const {
  ProductFeatures f;
  f.period = period;
  if (kind == Kind::Fixed) {
    f.z = fixed / scale;
    return f;
  }
  f.z.resize(num_products, dim);
  for (int j = 0; j < num_products; ++j) {
    for (int d = 0; d < dim; ++d) f.z(j, d) = rng.uniform(low, high) / scale;
  }
  return f;
}

Mat FeatureModel::mean() const {
  if (kind == Kind::Fixed) return fixed / scale;
  return Mat::Constant(num_products, dim, 0.5 * (low + high) / scale);
}

double FeatureModel::coordinate_variance() const {
  if (kind == Kind::Fixed) return 0.0;
  const double w = (high - low) / scale;
  return w * w / 12.0;
}

double FeatureModel::max_norm() const {
  if (kind == Kind::Fixed) {
    return fixed.rows() > 0 ? fixed.rowwise().norm().maxCoeff() / scale : 0.0;
  }
  const double m = std::max(std::abs(low), std::abs(high));
  return std::sqrt(static_cast<double>(dim)) * m / scale;
}

PeriodObservation simulate_period(const Environment& env, const Action& action,
                                  const ProductFeatures& features, Rng& rng, long period) {
  const auto& truth = env.truth;
  const double mean = truth.base_rate * arrival_rate(action, features, truth.theta, truth.basis);
  PeriodObservation obs;
  obs.period = period;
  obs.action = action;
  obs.features = features;
  obs.arrivals = rng.poisson(mean);
  const Vec q = choice_probabilities(action, features, truth.v);
  const auto counts = rng.multinomial(obs.arrivals, q);
  obs.no_purchase = counts[0];
  obs.purchases.assign(counts.begin() + 1, counts.end());
  return obs;
}

EpisodeContext prepare_episode(const Environment& env, long horizon, Rng& feature_rng) {
  EpisodeContext ctx;
  ctx.features.reserve(horizon);
  ctx.oracle.reserve(horizon);
  for (long t = 1; t <= horizon; ++t) {
    ctx.features.push_back(env.features.draw(feature_rng, t));
    ctx.oracle.push_back(
        oracle_best_action(env.truth, ctx.features.back(), env.assortment_size, env.search));
  }
  return ctx;
}

RegretTrace run_episode(Policy& policy, const Environment& env, const EpisodeContext& context,
                        Rng& outcome_rng, const DiagnosticsSink& sink) {
  RegretTrace trace;
  trace.policy = std::string(policy.name());
  const long horizon = static_cast<long>(context.features.size());
  double cumulative = 0.0;
  const int n = env.features.num_products;
  for (long t = 1; t <= horizon; ++t) {
    const auto& features = context.features[t - 1];
    try {
      const Action action = policy.select(features);
      validate_action(action, n, env.assortment_size, env.truth.prices);
      const double expected = expected_period_revenue(action, features, env.truth);
      const PeriodObservation obs = simulate_period(env, action, features, outcome_rng, t);
      double realized = 0.0;
      for (std::size_t i = 0; i < obs.purchases.size(); ++i) {
        realized += action.prices(action.assortment[i]) * static_cast<double>(obs.purchases[i]);
      }
      const double oracle = context.oracle[t - 1].value;
      cumulative += oracle - expected;
      trace.oracle_revenue.push_back(oracle);
      trace.policy_revenue.push_back(expected);
      trace.realized_revenue.push_back(realized);
      trace.cumulative_regret.push_back(cumulative);
      trace.actions.push_back(action);
      if (sink) sink(policy.diagnostics());
      policy.update(obs);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "policy '" << policy.name() << "' failed in period " << t << ": " << e.what();
      throw EpisodeFailure(os.str(), std::move(trace), t);
    }
  }
  return trace;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Bands aggregate(const std::vector<std::vector<double>>& series) {
  Bands bands;
  if (series.empty()) return bands;
  const std::size_t length = series.front().size();
  for (const auto& s : series) {
    if (s.size() != length) throw InvalidInput("aggregate: series lengths differ");
  }
  bands.mean.resize(length);
  bands.p10.resize(length);
  bands.p90.resize(length);
  std::vector<double> column(series.size());
  for (std::size_t t = 0; t < length; ++t) {
    double sum = 0.0;
    for (std::size_t r = 0; r < series.size(); ++r) {
      column[r] = series[r][t];
      sum += column[r];
    }
    bands.mean[t] = sum / static_cast<double>(series.size());
    bands.p10[t] = percentile(column, 0.10);
    bands.p90[t] = percentile(column, 0.90);
  }
  return bands;
}

double median_chosen_price(const RegretTrace& trace, long from, long to) {
  std::vector<double> prices;
  from = std::max(from, 0L);
  to = std::min(to, static_cast<long>(trace.actions.size()));
  for (long t = from; t < to; ++t) {
    const auto& a = trace.actions[t];
    for (int j : a.assortment) prices.push_back(a.prices(j));
  }
  if (prices.empty()) throw InvalidInput("median_chosen_price: empty window");
  return percentile(std::move(prices), 0.5);
}

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  out << "period,oracle_rev,policy_exp_rev,realized_rev,cum_regret\n";
  for (long t = 0; t < trace.length(); ++t) {
    out << (t + 1) << ',' << format_number(trace.oracle_revenue[t]) << ','
        << format_number(trace.policy_revenue[t]) << ','
        << format_number(trace.realized_revenue[t]) << ','
        << format_number(trace.cumulative_regret[t]) << '\n';
  }
}

void write_bands_csv(std::ostream& out, const Bands& bands) {
  out << "period,mean,p10,p90\n";
  for (std::size_t t = 0; t < bands.mean.size(); ++t) {
    out << (t + 1) << ',' << format_number(bands.mean[t]) << ',' << format_number(bands.p10[t])
        << ',' << format_number(bands.p90[t]) << '\n';
  }
}

}  // namespace pmnl
