#include "pmnl/estimation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "pmnl/errors.hpp"

namespace pmnl {

bool PeriodObservation::operator==(const PeriodObservation& other) const {
  return period == other.period && action == other.action &&
         features.period == other.features.period && features.z.rows() == other.features.z.rows() &&
         features.z.cols() == other.features.z.cols() && features.z == other.features.z &&
         arrivals == other.arrivals && purchases == other.purchases &&
         no_purchase == other.no_purchase;
}

void validate_observation(const PeriodObservation& observation) {
  if (observation.purchases.size() != observation.action.assortment.size()) {
    throw InvalidInput("purchase counts must align with the assortment");
  }
  long total = observation.no_purchase;
  if (observation.no_purchase < 0 || observation.arrivals < 0) {
    throw InvalidInput("counts must be nonnegative");
  }
  for (long c : observation.purchases) {
    if (c < 0) throw InvalidInput("counts must be nonnegative");
    total += c;
  }
  if (total != observation.arrivals) {
    std::ostringstream os;
    os << "period " << observation.period << ": purchases + no-purchase = " << total
       << " but arrivals = " << observation.arrivals;
    throw InvalidInput(os.str());
  }
}

void History::append(PeriodObservation observation) {
  validate_observation(observation);
  if (!observations_.empty() && observation.period <= observations_.back().period) {
    throw InvalidInput("history periods must be strictly increasing");
  }
  observations_.push_back(std::move(observation));
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof(T));
  }
};

}  // namespace

std::uint64_t History::hash() const {
  Fnv1a f;
  for (const auto& obs : observations_) {
    f.value<std::int64_t>(obs.period);
    for (int j : obs.action.assortment) f.value<std::int32_t>(j);
    for (Eigen::Index j = 0; j < obs.action.prices.size(); ++j) f.value(obs.action.prices(j));
    for (Eigen::Index i = 0; i < obs.features.z.size(); ++i) f.value(obs.features.z.data()[i]);
    f.value<std::int64_t>(obs.arrivals);
    for (long c : obs.purchases) f.value<std::int64_t>(c);
    f.value<std::int64_t>(obs.no_purchase);
  }
  return f.h;
}

ChoicePeriod choice_period(const Action& action, const ProductFeatures& features) {
  ChoicePeriod period;
  const int k = action.size();
  period.z.resize(k, features.z.cols());
  period.prices.resize(k);
  period.counts = Vec::Zero(k);
  for (int i = 0; i < k; ++i) {
    const int j = action.assortment[i];
    period.z.row(i) = features.z.row(j);
    period.prices(i) = action.prices(j);
  }
  return period;
}

void ChoiceData::add(const PeriodObservation& observation) {
  ChoicePeriod period = choice_period(observation.action, observation.features);
  for (std::size_t i = 0; i < observation.purchases.size(); ++i) {
    period.counts(static_cast<Eigen::Index>(i)) = static_cast<double>(observation.purchases[i]);
  }
  period.arrivals = static_cast<double>(observation.arrivals);
  periods.push_back(std::move(period));
}

PoissonData poisson_data(const History& history, const ArrivalBasis& basis, double base_rate) {
  PoissonData data;
  data.base_rate = base_rate;
  for (const auto& obs : history) {
    data.add(basis.evaluate(obs.action, obs.features), static_cast<double>(obs.arrivals));
  }
  return data;
}

ChoiceData choice_data(const History& history) {
  ChoiceData data;
  for (const auto& obs : history) data.add(obs);
  return data;
}

namespace {

double checked_exp(double exponent, const char* what) {
  if (!std::isfinite(exponent) || std::abs(exponent) > kMaxExponent) {
    throw NumericOverflow(std::string(what) + " exponent outside [-700, 700]");
  }
  return std::exp(exponent);
}

void check_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    std::ostringstream os;
    os << what << ": parameter dimension " << got << " differs from data dimension " << expected;
    throw InvalidInput(os.str());
  }
}

Evaluation evaluate_poisson(const Vec& theta, const PoissonData& data, bool with_hessian) {
  const Eigen::Index d = theta.size();
  Evaluation e;
  e.gradient = Vec::Zero(d);
  if (with_hessian) e.neg_hessian = Mat::Zero(d, d);
  e.scale = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const Vec& x = data.x[s];
    check_dim(x.size(), d, "poisson likelihood");
    const double eta = theta.dot(x);
    const double rate = data.base_rate * checked_exp(eta, "arrival-rate");
    const double n = data.arrivals[s];
    e.value += n * eta - rate;
    e.gradient.noalias() += (n - rate) * x;
    if (with_hessian) e.neg_hessian.noalias() += rate * x * x.transpose();
    e.scale += (n + rate) * x.norm();
  }
  return e;
}

// Shifted utilities and probabilities of one choice period.
struct ChoiceEval {
  Vec u;
  Vec q;
  double q0 = 0.0;
  double log_denominator = 0.0;
};

void evaluate_choice(const ChoicePeriod& period, const Vec& v, ChoiceEval& out) {
  out.u.noalias() = period.z * v - period.prices;
  double shift = 0.0;
  for (Eigen::Index j = 0; j < out.u.size(); ++j) {
    const double u = out.u(j);
    if (!std::isfinite(u) || std::abs(u) > kMaxExponent) {
      throw NumericOverflow("choice utility exponent outside [-700, 700]");
    }
    shift = std::max(shift, u);
  }
  out.q = (out.u.array() - shift).exp();
  const double outside = std::exp(-shift);
  const double denom = outside + out.q.sum();
  out.q /= denom;
  out.q0 = outside / denom;
  out.log_denominator = shift + std::log(denom);
}

void add_phi(const ChoicePeriod& period, const ChoiceEval& ce, double weight, Mat& out) {
  const Vec mean = period.z.transpose() * ce.q;
  Mat centered = period.z.rowwise() - mean.transpose();
  out.noalias() += weight * (centered.transpose() * ce.q.asDiagonal() * centered);
  out.noalias() += (weight * ce.q0) * mean * mean.transpose();
}

Evaluation evaluate_mnl(const Vec& v, const ChoiceData& data, bool with_hessian) {
  const Eigen::Index d = v.size();
  Evaluation e;
  e.gradient = Vec::Zero(d);
  if (with_hessian) e.neg_hessian = Mat::Zero(d, d);
  e.scale = 0.0;
  ChoiceEval ce;
  for (const auto& period : data.periods) {
    if (period.arrivals <= 0.0) continue;
    check_dim(period.z.cols(), d, "mnl likelihood");
    evaluate_choice(period, v, ce);
    e.value += period.counts.dot(ce.u) - period.arrivals * ce.log_denominator;
    const Vec residual = period.counts - period.arrivals * ce.q;
    e.gradient.noalias() += period.z.transpose() * residual;
    if (with_hessian) add_phi(period, ce, period.arrivals, e.neg_hessian);
    const Vec row_norms = period.z.rowwise().norm();
    e.scale += (period.counts + period.arrivals * ce.q).dot(row_norms);
  }
  return e;
}

}  // namespace

double poisson_loglik(const Vec& theta, const PoissonData& data) {
  return evaluate_poisson(theta, data, false).value;
}

Vec poisson_loglik_grad(const Vec& theta, const PoissonData& data) {
  return evaluate_poisson(theta, data, false).gradient;
}

Mat poisson_information(const Vec& theta, const PoissonData& data) {
  return evaluate_poisson(theta, data, true).neg_hessian;
}

double poisson_loglik(const Vec& theta, const History& history, const ArrivalBasis& basis,
                      double base_rate) {
  if (history.empty()) throw InvalidInput("poisson_loglik: empty history");
  return poisson_loglik(theta, poisson_data(history, basis, base_rate));
}

Vec poisson_loglik_grad(const Vec& theta, const History& history, const ArrivalBasis& basis,
                        double base_rate) {
  return poisson_loglik_grad(theta, poisson_data(history, basis, base_rate));
}

double mnl_loglik(const Vec& v, const ChoiceData& data) { return evaluate_mnl(v, data, false).value; }

Vec mnl_loglik_grad(const Vec& v, const ChoiceData& data) {
  return evaluate_mnl(v, data, false).gradient;
}

Mat mnl_neg_hessian(const Vec& v, const ChoiceData& data) {
  return evaluate_mnl(v, data, true).neg_hessian;
}

double mnl_loglik(const Vec& v, const History& history) { return mnl_loglik(v, choice_data(history)); }

Vec mnl_loglik_grad(const Vec& v, const History& history) {
  return mnl_loglik_grad(v, choice_data(history));
}

Mat phi_matrix(const ChoicePeriod& period, const Vec& v) {
  check_dim(period.z.cols(), v.size(), "phi_matrix");
  ChoiceEval ce;
  evaluate_choice(period, v, ce);
  Mat out = Mat::Zero(v.size(), v.size());
  add_phi(period, ce, 1.0, out);
  return out;
}

Mat phi_matrix(const Action& action, const ProductFeatures& features, const Vec& v) {
  return phi_matrix(choice_period(action, features), v);
}

FisherState::FisherState(int dim_x, int dim_z, double base_rate, double x_bar)
    : dim_x_(dim_x),
      dim_z_(dim_z),
      base_rate_(base_rate),
      x_bar_(x_bar),
      poisson_(Mat::Zero(dim_x, dim_x)),
      mnl_hat_(Mat::Zero(dim_z, dim_z)) {}

FisherState FisherState::restore(int dim_x, int dim_z, double base_rate, double x_bar,
                                 std::vector<Vec> xs, std::vector<ChoicePeriod> choices,
                                 Mat poisson, Mat mnl_hat) {
  if (xs.size() != choices.size()) throw InvalidInput("FisherState: period counts differ");
  check_dim(dim_x, poisson.rows(), "FisherState::restore");
  check_dim(dim_z, mnl_hat.rows(), "FisherState::restore");
  FisherState state(dim_x, dim_z, base_rate, x_bar);
  state.xs_ = std::move(xs);
  state.choices_ = std::move(choices);
  state.poisson_ = std::move(poisson);
  state.mnl_hat_ = std::move(mnl_hat);
  return state;
}

void FisherState::accumulate(const Vec& x, const ChoicePeriod& choice, const Vec& theta_hat,
                             const Vec& v_hat) {
  check_dim(dim_x_, x.size(), "FisherState::accumulate");
  check_dim(dim_z_, choice.z.cols(), "FisherState::accumulate");
  if (dim_x_ > 0) {
    const double rate = base_rate_ * checked_exp(theta_hat.dot(x), "arrival-rate");
    poisson_.noalias() += rate * x * x.transpose();
  }
  mnl_hat_.noalias() += base_rate_ * std::exp(-x_bar_) * phi_matrix(choice, v_hat);
  xs_.push_back(x);
  choices_.push_back(choice);
}

void FisherState::accumulate(const PeriodObservation& observation, const ArrivalBasis& basis,
                             const Vec& theta_hat, const Vec& v_hat) {
  accumulate(basis.evaluate(observation.action, observation.features),
             choice_period(observation.action, observation.features), theta_hat, v_hat);
}

void FisherState::recompute(const Vec& theta_hat, const Vec& v_hat) {
  poisson_.setZero(dim_x_, dim_x_);
  if (dim_x_ > 0) {
    for (const auto& x : xs_) {
      const double rate = base_rate_ * checked_exp(theta_hat.dot(x), "arrival-rate");
      poisson_.noalias() += rate * x * x.transpose();
    }
  }
  mnl_hat_ = mnl_hat_at(v_hat);
}

Mat FisherState::mnl_hat_at(const Vec& v) const {
  Mat out = Mat::Zero(dim_z_, dim_z_);
  ChoiceEval ce;
  const double weight = base_rate_ * std::exp(-x_bar_);
  for (const auto& choice : choices_) {
    evaluate_choice(choice, v, ce);
    add_phi(choice, ce, weight, out);
  }
  return out;
}

Mat FisherState::mnl_exact(const Vec& v, const Vec& theta) const {
  Mat out = Mat::Zero(dim_z_, dim_z_);
  ChoiceEval ce;
  for (std::size_t s = 0; s < choices_.size(); ++s) {
    const double rate =
        base_rate_ * (dim_x_ > 0 ? checked_exp(theta.dot(xs_[s]), "arrival-rate") : 1.0);
    evaluate_choice(choices_[s], v, ce);
    add_phi(choices_[s], ce, rate, out);
  }
  return out;
}

Mat mnl_period_upper(const Action& action, const ProductFeatures& features, const Vec& v,
                     double base_rate, double x_bar) {
  return base_rate * std::exp(x_bar) * phi_matrix(action, features, v);
}

Mat mnl_period_exact(const Action& action, const ProductFeatures& features, const Vec& v,
                     const Vec& theta, const ArrivalBasis& basis, double base_rate) {
  return base_rate * arrival_rate(action, features, theta, basis) * phi_matrix(action, features, v);
}

ConcaveObjective poisson_objective(const PoissonData& data) {
  return [&data](const Vec& w, bool with_hessian) { return evaluate_poisson(w, data, with_hessian); };
}

ConcaveObjective mnl_objective(const ChoiceData& data) {
  return [&data](const Vec& w, bool with_hessian) { return evaluate_mnl(w, data, with_hessian); };
}

Vec project_to_ball(const Vec& w, const Vec& center, double radius) {
  const Vec delta = w - center;
  const double norm = delta.norm();
  if (norm <= radius) return w;
  if (norm == 0.0) return center;
  return center + (radius / norm) * delta;
}

namespace {

// Maximiser of the local quadratic model g^T s - s^T H s / 2 over the ball,
// returned as a step from w.
Vec trust_region_step(const Vec& w, const Vec& center, double radius, const Vec& g, const Mat& h) {
  const Vec delta = w - center;
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec lambda = es.eigenvalues().cwiseMax(0.0);
  const double top = lambda.size() > 0 ? lambda.maxCoeff() : 0.0;
  const double ridge = std::max(1e-14 * top, 1e-300);
  lambda.array() += ridge;
  const Vec beta = es.eigenvectors().transpose() * (h * delta + g);
  auto y_norm = [&](double mu) { return (beta.array() / (lambda.array() + mu)).matrix().norm(); };
  double mu = 0.0;
  if (y_norm(0.0) > radius) {
    double lo = 0.0;
    double hi = beta.norm() / radius;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (y_norm(mid) > radius) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    mu = hi;
  }
  Vec y = es.eigenvectors() * (beta.array() / (lambda.array() + mu)).matrix();
  const double yn = y.norm();
  if (yn > radius) y *= radius / yn;
  return y - delta;
}

bool safe_value(const ConcaveObjective& objective, const Vec& w, double& value) {
  try {
    value = objective(w, false).value;
    return std::isfinite(value);
  } catch (const NumericOverflow&) {
    return false;
  }
}

}  // namespace

EstimationReport maximize_in_ball(const ConcaveObjective& objective, const Vec& center,
                                  double radius, const Vec& start, const SolverOptions& options) {
  if (!(radius >= 0.0)) throw InvalidInput("maximize_in_ball: radius must be nonnegative");
  EstimationReport report;
  Vec w = start.size() == center.size() ? project_to_ball(start, center, radius) : center;
  if (radius == 0.0) w = center;
  Evaluation eval = objective(w, true);

  for (int iter = 0;; ++iter) {
    // Gradient normalized before projection so the ball cannot clip the test.
    const double unit = std::max(1.0, eval.scale);
    const Vec pg = project_to_ball(w + eval.gradient / unit, center, radius) - w;
    report.projected_grad_norm = pg.norm() * unit;
    report.tolerance = options.tolerance * unit;
    report.iterations = iter;
    if (w.size() == 0 || radius == 0.0 || report.projected_grad_norm <= report.tolerance) {
      report.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    bool moved = false;
    const Vec step = trust_region_step(w, center, radius, eval.gradient, eval.neg_hessian);
    const double slope = eval.gradient.dot(step);
    const double predicted = slope - 0.5 * step.dot(eval.neg_hessian * step);
    if (predicted <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(eval.value))) {
      report.converged = true;
      report.precision_limited = true;
      break;
    }
    if (slope > 0.0) {
      double alpha = 1.0;
      for (int k = 0; k < 60; ++k, alpha *= options.shrink) {
        const Vec trial = project_to_ball(w + alpha * step, center, radius);
        double value;
        if (safe_value(objective, trial, value) &&
            value >= eval.value + options.armijo * alpha * slope && trial != w) {
          w = trial;
          moved = true;
          break;
        }
      }
    }
    if (!moved) {
      const double top = std::max(max_eigenvalue(eval.neg_hessian), 1e-12);
      double alpha = 1.0 / top;
      for (int k = 0; k < 60; ++k, alpha *= options.shrink) {
        const Vec trial = project_to_ball(w + alpha * eval.gradient, center, radius);
        double value;
        if (safe_value(objective, trial, value) &&
            value >= eval.value + options.armijo * eval.gradient.dot(trial - w) &&
            trial != w) {
          w = trial;
          moved = true;
          break;
        }
      }
    }
    if (!moved) break;
    eval = objective(w, true);
  }

  report.estimate = w;
  report.loglik = eval.value;
  report.grad_norm = eval.gradient.norm();
  report.on_boundary = radius == 0.0 || (w - center).norm() >= radius * (1.0 - 1e-9);
  return report;
}

EstimationReport global_mle(LikelihoodKind kind, const History& history, const ArrivalBasis& basis,
                            double base_rate, int dim, double radius,
                            const SolverOptions& options) {
  return local_mle(kind, history, basis, base_rate, Vec::Zero(dim), radius, Vec(), options);
}

EstimationReport local_mle(LikelihoodKind kind, const History& history, const ArrivalBasis& basis,
                           double base_rate, const Vec& center, double radius, const Vec& start,
                           const SolverOptions& options) {
  const Vec init = start.size() == center.size() ? start : center;
  if (kind == LikelihoodKind::Poisson) {
    const PoissonData data = poisson_data(history, basis, base_rate);
    return maximize_in_ball(poisson_objective(data), center, radius, init, options);
  }
  const ChoiceData data = choice_data(history);
  return maximize_in_ball(mnl_objective(data), center, radius, init, options);
}

}  // namespace pmnl
