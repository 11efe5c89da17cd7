#include "pmnl/policy.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pmnl/errors.hpp"
#include "pmnl/rng.hpp"

namespace pmnl {

void validate_policy_config(const PolicyConfig& c) {
  if (c.assortment_size < 1 || c.num_products < c.assortment_size) {
    std::ostringstream os;
    os << "need 1 <= K <= N, got K = " << c.assortment_size << ", N = " << c.num_products;
    throw ConfigError("Assumption 1", os.str());
  }
  if (!(c.prices.low > 0.0 && c.prices.low < c.prices.high)) {
    std::ostringstream os;
    os << "need 0 < p_l < p_h, got [" << c.prices.low << ", " << c.prices.high << "]";
    throw ConfigError("Assumption 2", os.str());
  }
  if (!(c.v_bar > 0.0)) throw ConfigError("Assumption 3", "v_bar must be positive");
  if (c.dim_x > 0 && !(c.x_bar > 0.0)) throw ConfigError("Assumption 5", "x_bar must be positive");
  if (!(c.base_rate > 0.0)) throw InvalidInput("base rate Lambda must be positive");
  if (c.horizon < 1) throw InvalidInput("horizon T must be at least 1");
  if (c.dim_z < 1) throw InvalidInput("d_z must be at least 1");
  if (c.basis.dim() != c.dim_x) {
    std::ostringstream os;
    os << "arrival basis '" << c.basis.id() << "' has dimension " << c.basis.dim()
       << " but d_x = " << c.dim_x;
    throw InvalidInput(os.str());
  }
  if (c.reference_features.size() > 0 &&
      (c.reference_features.rows() != c.num_products || c.reference_features.cols() != c.dim_z)) {
    throw InvalidInput("reference features must be N x d_z");
  }
  if (c.refresh_every < 1) throw InvalidInput("refresh_every must be at least 1");
  if (c.design_price_levels < 1) throw InvalidInput("design_price_levels must be at least 1");
  if (!(c.bonus_scale >= 0.0)) throw InvalidInput("bonus scale must be nonnegative");
}

StageSchedule compute_t0_T0(long horizon, int dim_z, int dim_x, double sigma0) {
  if (!(sigma0 > 0.0)) throw InvalidInput("sigma_0 must be positive");
  if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  const double T = static_cast<double>(horizon);
  const double first = std::ceil(std::log(dim_z * T) / (sigma0 * (1.0 - std::numbers::ln2)));
  StageSchedule s;
  s.t0 = std::max(static_cast<long>(first), 2L * dim_x);
  s.T0 = std::max(s.t0 + 1, static_cast<long>(std::floor(std::log(T))));
  return s;
}

StageSchedule compute_t0_T0(const PolicyConfig& config) {
  return compute_t0_T0(config.horizon, config.dim_z, config.dim_x, config.sigma0);
}

double compute_c4(double base_rate, double x_bar) {
  const double ell = std::log1p(3.0 / (base_rate * std::exp(x_bar)));
  const double lead = 2.0 * std::numbers::e * std::numbers::e /
                      (ell * ell * std::sqrt(6.0 * std::numbers::pi) * base_rate * std::exp(-x_bar));
  return std::max(1.0, lead) * 2.0 * std::numbers::e / ell;
}

double compute_kappa(double v_bar, const PriceBounds& p, int k) {
  const double denom = k * std::exp(v_bar - p.low) + 1.0;
  return std::exp(-v_bar - p.high) / (denom * denom);
}

double compute_c5(double tau_v) {
  return 16.0 * tau_v * tau_v / (4.0 * tau_v + std::exp(-4.0 * tau_v) - 1.0);
}

double compute_c8(double tau_v, double v_bar, const PriceBounds& p, int k) {
  return 3.0 * std::expm1(4.0 * tau_v) * (k * std::exp(v_bar - p.low) + 1.0) + 1.0;
}

double compute_c0(double tau_v, double v_bar, const PriceBounds& p, int k, double base_rate) {
  const double spread = p.high - p.low;
  return spread * spread / (base_rate * std::exp(-v_bar)) * compute_c8(tau_v, v_bar, p, k);
}

double compute_omega_v(double tau_v, double c4, double c5, double c8, double x_bar, double T,
                       double base_rate, int dim_z) {
  const double lT = std::log(T);
  const double TL = T * base_rate;
  return 8.0 * c8 * std::exp(x_bar) + 4.0 * c8 * std::sqrt(8.0 * std::exp(x_bar) * lT / TL) +
         32.0 * c8 * lT / TL +
         8.0 * (4.0 * tau_v * c4 + c5) * c8 *
             ((dim_z + 2.0) * lT + dim_z * std::log(6.0 * tau_v * base_rate));
}

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || !(value > 0.0)) {
    std::ostringstream os;
    os << "constant " << name << " evaluated to " << value;
    throw InternalConsistency(os.str());
  }
}

}  // namespace

PolicyConstants compute_constants(const PolicyConfig& config, long T0) {
  if (T0 < 2) throw InvalidInput("compute_constants needs T0 >= 2");
  const double T = static_cast<double>(config.horizon);
  const double L = config.base_rate;
  const double xb = config.x_bar;
  const double lT = std::log(T);
  const double t0 = static_cast<double>(T0);
  const int dx = config.dim_x;
  const int dz = config.dim_z;

  PolicyConstants c;
  c.c4 = compute_c4(L, xb);
  c.kappa = compute_kappa(config.v_bar, config.prices, config.assortment_size);
  require_positive(c.c4, "c4");
  require_positive(c.kappa, "kappa");

  const double a = 4.0 * lT / (L * std::exp(xb) * t0);
  if (dx > 0) {
    const double s1 = config.sigma1;
    if (!(s1 > 0.0)) throw InvalidInput("sigma_1 must be positive");
    const double tt2 =
        2.0 * std::exp(2.0 * xb) / (T * L * s1) * (2.0 + a + std::sqrt(a) + std::exp(-xb)) +
        8.0 * (2.0 * xb * c.c4 + 1.0) * std::exp(xb) / (t0 * L * s1) *
            (lT + dx * std::log(3.0 * xb * (L * T + 1.0)));
    require_positive(tt2, "tau_theta^2");
    c.tau_theta_tilde = std::sqrt(tt2);
    c.tau_theta = std::min(1.0, c.tau_theta_tilde);
    const double tt = c.tau_theta;
    c.omega_theta = 8.0 * std::exp(2.0 * tt * xb) *
                    (0.5 + std::exp(xb) + std::sqrt(2.0 * std::exp(xb) * lT / (T * L)) +
                     4.0 * lT / (T * L) +
                     2.0 * (tt * xb * c.c4 + 1.0) *
                         (2.0 * lT + dx * std::log(6.0 * tt * xb * (L * T + 1.0))));
    require_positive(c.omega_theta, "omega_theta");
  }

  const double s0 = config.sigma0;
  if (!(s0 > 0.0)) throw InvalidInput("sigma_0 must be positive");
  const double inner = (dz + 1.0) * lT + dz * std::log(6.0 * L);
  const double scale = 8.0 * std::exp(xb) / (c.kappa * t0 * L * s0);
  const double tv2 = 2.0 * std::exp(2.0 * xb) / (c.kappa * T * L * s0) * (2.0 + a + std::sqrt(a)) +
                     scale * inner + scale * std::sqrt(t0 * L * std::exp(xb) * inner);
  require_positive(tv2, "tau_v^2");
  c.tau_v_tilde = std::sqrt(tv2);
  c.tau_v = std::min(1.0, c.tau_v_tilde);
  c.c5 = compute_c5(c.tau_v);
  c.c8 = compute_c8(c.tau_v, config.v_bar, config.prices, config.assortment_size);
  c.c0 = compute_c0(c.tau_v, config.v_bar, config.prices, config.assortment_size, L);
  c.omega_v = compute_omega_v(c.tau_v, c.c4, c.c5, c.c8, xb, T, L, dz);
  require_positive(c.c5, "c5");
  require_positive(c.c8, "c8");
  require_positive(c.c0, "c0");
  require_positive(c.omega_v, "omega_v");
  return c;
}

namespace {

std::vector<std::vector<double>> design_price_patterns(const PolicyConfig& config) {
  const int k = config.assortment_size;
  const auto levels = config.design_price_levels == 1
                          ? std::vector<double>{config.prices.high}
                          : price_grid(config.prices, config.design_price_levels);
  const int n_levels = static_cast<int>(levels.size());
  std::vector<std::vector<double>> patterns;
  if (std::pow(static_cast<double>(n_levels), k) <= 1000.0) {
    std::vector<int> idx(k, 0);
    while (true) {
      std::vector<double> pattern(k);
      for (int i = 0; i < k; ++i) pattern[i] = levels[idx[i]];
      patterns.push_back(std::move(pattern));
      int i = k - 1;
      while (i >= 0 && idx[i] == n_levels - 1) idx[i--] = 0;
      if (i < 0) break;
      ++idx[i];
    }
    return patterns;
  }
  for (int base = 0; base < n_levels; ++base) {
    patterns.emplace_back(k, levels[base]);
    for (int i = 0; i < k; ++i) {
      for (int l = 0; l < n_levels; ++l) {
        if (l == base) continue;
        std::vector<double> pattern(k, levels[base]);
        pattern[i] = levels[l];
        patterns.push_back(std::move(pattern));
      }
    }
  }
  return patterns;
}

int numeric_rank(const Mat& symmetric) {
  if (symmetric.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric, Eigen::EigenvaluesOnly);
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > 1e-9 * top) ++rank;
  }
  return rank;
}

}  // namespace

InitialDesign build_initial_design(const PolicyConfig& config) {
  validate_policy_config(config);
  const int n = config.num_products;
  const int k = config.assortment_size;
  ProductFeatures reference;
  reference.z = config.reference_features.size() > 0 ? config.reference_features
                                                     : Mat::Zero(n, config.dim_z);

  constexpr std::size_t kMaxCandidates = 50000;
  const auto patterns = design_price_patterns(config);
  std::vector<Action> candidates;
  const auto assortments = num_combinations(n, k) <= config.search.assortment_limit
                               ? enumerate_assortments(n, k)
                               : std::vector<std::vector<int>>{};
  if (assortments.empty()) {
    throw CapacityError("exploration design needs an enumerable assortment family");
  }
  for (const auto& assortment : assortments) {
    for (const auto& pattern : patterns) {
      if (candidates.size() >= kMaxCandidates) break;
      candidates.push_back(make_action(assortment, pattern, n, config.prices));
    }
  }

  InitialDesign design;
  const int dx = config.dim_x;
  if (dx > 0) {
    std::vector<Vec> xs;
    xs.reserve(candidates.size());
    double largest = 0.0;
    for (const auto& a : candidates) {
      xs.push_back(config.basis.evaluate(a, reference));
      largest = std::max(largest, xs.back().norm());
    }
    std::vector<Vec> ortho;
    Mat gram = Mat::Zero(dx, dx);
    while (static_cast<int>(ortho.size()) < dx) {
      double best = -1.0;
      std::size_t best_idx = 0;
      Vec best_residual;
      for (std::size_t c = 0; c < xs.size(); ++c) {
        Vec r = xs[c];
        for (const auto& q : ortho) r -= q.dot(r) * q;
        const double norm = r.norm();
        if (norm > best) {
          best = norm;
          best_idx = c;
          best_residual = std::move(r);
        }
      }
      if (best <= 1e-9 * std::max(1.0, largest)) {
        std::ostringstream os;
        os << "arrival basis '" << config.basis.id() << "' reaches rank " << ortho.size()
           << " < d_x = " << dx << " on the exploration grid";
        throw ConfigError("Assumption 6", os.str());
      }
      ortho.push_back(best_residual / best);
      design.block.push_back(candidates[best_idx]);
      gram.noalias() += xs[best_idx] * xs[best_idx].transpose();
    }
    design.rank_block = dx;
    design.gram_min_eig = min_eigenvalue(gram);
  }

  const Vec v0 = Vec::Zero(config.dim_z);
  Mat coverage = Mat::Zero(config.dim_z, config.dim_z);
  for (const auto& a : design.block) coverage += phi_matrix(a, reference, v0);
  int rank = numeric_rank(coverage);
  std::vector<Mat> phis;
  if (rank < config.dim_z || design.block.empty()) {
    phis.reserve(candidates.size());
    for (const auto& a : candidates) phis.push_back(phi_matrix(a, reference, v0));
  }
  while (rank < config.dim_z || design.block.empty()) {
    int best_rank = -1;
    std::size_t best_idx = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const int r = numeric_rank(coverage + phis[c]);
      if (r > best_rank) {
        best_rank = r;
        best_idx = c;
      }
    }
    if (best_rank <= rank && !design.block.empty()) break;
    design.block.push_back(candidates[best_idx]);
    coverage += phis[best_idx];
    rank = best_rank;
  }
  design.mnl_rank = rank;
  return design;
}

const Action& initial_action(const InitialDesign& design, long period) {
  if (design.block.empty()) throw InvalidInput("empty exploration design");
  if (period < 1) throw InvalidInput("periods are numbered from 1");
  return design.block[static_cast<std::size_t>((period - 1) % static_cast<long>(design.block.size()))];
}

double resolve_sigma0(const PolicyConfig& config, const InitialDesign& design) {
  if (config.sigma0 > 0.0) return config.sigma0;
  if (config.feature_variance > 0.0) return config.assortment_size * config.feature_variance / 2.0;
  ProductFeatures reference;
  reference.z = config.reference_features.size() > 0
                    ? config.reference_features
                    : Mat::Zero(config.num_products, config.dim_z);
  Mat coverage = Mat::Zero(config.dim_z, config.dim_z);
  for (const auto& a : design.block) coverage += phi_matrix(a, reference, Vec::Zero(config.dim_z));
  const double sigma0 = min_eigenvalue(coverage) / (2.0 * static_cast<double>(design.block.size()));
  if (!(sigma0 > 0.0)) {
    throw ConfigError("Assumption 6",
                      "fixed features do not make the MNL information positive definite on the "
                      "exploration design");
  }
  return sigma0;
}

double resolve_sigma1(const PolicyConfig& config, const InitialDesign& design) {
  if (config.sigma1 > 0.0) return config.sigma1;
  if (config.dim_x == 0) return 1.0;
  return design.gram_min_eig / (2.0 * static_cast<double>(design.block.size()));
}

// ---------------------------------------------------------------------------

PmnlPolicy::PmnlPolicy(PolicyConfig config, bool fixed_arrival)
    : config_(std::move(config)), fixed_arrival_(fixed_arrival) {
  validate_policy_config(config_);
  design_ = build_initial_design(config_);
  config_.sigma0 = resolve_sigma0(config_, design_);
  config_.sigma1 = resolve_sigma1(config_, design_);

  basis_ = fixed_arrival_ ? ArrivalBasis::constant() : config_.basis;
  x_bar_ = fixed_arrival_ ? 0.0 : config_.x_bar;
  dim_x_ = fixed_arrival_ ? 0 : config_.dim_x;

  schedule_ = compute_t0_T0(config_.horizon, config_.dim_z, dim_x_, config_.sigma0);
  if (config_.stage1_length) schedule_.T0 = *config_.stage1_length;

  PolicyConfig effective = config_;
  effective.basis = basis_;
  effective.x_bar = x_bar_;
  effective.dim_x = dim_x_;
  constants_ = compute_constants(effective, std::max(schedule_.T0, 2L));
  if (config_.tau_theta_override) constants_.tau_theta = *config_.tau_theta_override;
  if (config_.tau_v_override) constants_.tau_v = *config_.tau_v_override;

  fisher_ = FisherState(dim_x_, config_.dim_z, config_.base_rate, x_bar_);
  theta_hat_ = Vec::Zero(dim_x_);
  v_hat_ = Vec::Zero(config_.dim_z);
  pilot_theta_ = theta_hat_;
  pilot_v_ = v_hat_;
  if (schedule_.T0 <= 0) run_pilot();
}

Action PmnlPolicy::select(const ProductFeatures& features) {
  const long t = period() + 1;
  diagnostics_ = PeriodDiagnostics{};
  diagnostics_.period = t;
  diagnostics_.tau_theta = constants_.tau_theta;
  diagnostics_.tau_v = constants_.tau_v;
  diagnostics_.omega_theta = constants_.omega_theta;
  diagnostics_.omega_v = constants_.omega_v;
  diagnostics_.theta_hat = theta_hat_;
  diagnostics_.v_hat = v_hat_;
  diagnostics_.theta_converged = last_theta_converged_;
  diagnostics_.v_converged = last_v_converged_;
  diagnostics_.theta_iterations = last_theta_iterations_;
  diagnostics_.v_iterations = last_v_iterations_;

  if (stage_ == Stage::Explore) {
    diagnostics_.stage = "explore";
    diagnostics_.action = initial_action(design_, t);
    return diagnostics_.action;
  }
  diagnostics_.stage = "ucb";
  prepare(features);
  const ActionObjective objective = [this](const Action& a) { return ucb_value(a).shifted(); };
  auto best = maximize_over_actions(config_.num_products, config_.assortment_size, config_.prices,
                                    config_.search, objective, scores_);
  diagnostics_.action = best.action;
  diagnostics_.ucb = ucb_value(best.action);
  return best.action;
}

void PmnlPolicy::update(const PeriodObservation& observation) {
  history_.append(observation);
  const Vec x = basis_.evaluate(observation.action, observation.features);
  poisson_.base_rate = config_.base_rate;
  poisson_.add(x, static_cast<double>(observation.arrivals));
  choices_.add(observation);
  fisher_.accumulate(x, choices_.periods.back(), theta_hat_, v_hat_);

  const long t = period();
  if (stage_ == Stage::Explore) {
    if (t == schedule_.T0) run_pilot();
    return;
  }
  if ((t - schedule_.T0) % config_.refresh_every == 0) run_local();
}

void PmnlPolicy::run_pilot() {
  if (config_.pilot_theta && dim_x_ > 0) {
    pilot_theta_ = *config_.pilot_theta;
  } else if (dim_x_ > 0 && poisson_.size() > 0) {
    const auto report = maximize_in_ball(poisson_objective(poisson_), Vec::Zero(dim_x_), 1.0,
                                         Vec::Zero(dim_x_), config_.solver);
    pilot_theta_ = report.estimate;
    last_theta_converged_ = report.converged;
    last_theta_iterations_ = report.iterations;
  }
  if (config_.pilot_v) {
    pilot_v_ = *config_.pilot_v;
  } else if (choices_.size() > 0) {
    const auto report = maximize_in_ball(mnl_objective(choices_), Vec::Zero(config_.dim_z),
                                         config_.v_bar, Vec::Zero(config_.dim_z), config_.solver);
    pilot_v_ = report.estimate;
    last_v_converged_ = report.converged;
    last_v_iterations_ = report.iterations;
  }
  theta_hat_ = pilot_theta_;
  v_hat_ = pilot_v_;
  if (config_.fisher_mode == FisherMode::Exact) fisher_.recompute(theta_hat_, v_hat_);
  stage_ = Stage::Ucb;
}

void PmnlPolicy::run_local() {
  if (dim_x_ > 0) {
    const auto report = maximize_in_ball(poisson_objective(poisson_), pilot_theta_,
                                         constants_.tau_theta, theta_hat_, config_.solver);
    last_theta_converged_ = report.converged;
    last_theta_iterations_ = report.iterations;
    if (report.converged) theta_hat_ = report.estimate;
  }
  const auto report = maximize_in_ball(mnl_objective(choices_), pilot_v_, constants_.tau_v, v_hat_,
                                       config_.solver);
  last_v_converged_ = report.converged;
  last_v_iterations_ = report.iterations;
  if (report.converged) v_hat_ = report.estimate;
  if (config_.fisher_mode == FisherMode::Exact) fisher_.recompute(theta_hat_, v_hat_);
}

namespace {

void require_invertible(const Mat& m, const char* name) {
  const double top = max_eigenvalue(m);
  const double bottom = min_eigenvalue(m);
  if (!(top > 0.0) || !(bottom > 1e-12 * top)) {
    std::ostringstream os;
    os << name << " is singular (eigenvalues in [" << bottom << ", " << top << "])";
    throw NeedsMoreExploration(os.str());
  }
}

}  // namespace

void PmnlPolicy::prepare(const ProductFeatures& features) {
  if (dim_x_ > 0) {
    require_invertible(fisher_.poisson(), "Poisson information");
    poisson_inverse_ = inverse_psd(fisher_.poisson());
  }
  require_invertible(fisher_.mnl_hat(), "MNL information surrogate");
  const Mat root = inverse_sqrt(fisher_.mnl_hat());
  whitened_ = features.z * root;
  scores_ = product_scores(features, v_hat_);
  prepared_features_ = features;
}

UcbBreakdown PmnlPolicy::ucb_value(const Action& action, const ProductFeatures& features) {
  prepare(features);
  return ucb_value(action);
}

UcbBreakdown PmnlPolicy::ucb_value(const Action& action) const {
  const double L = config_.base_rate;
  const double ph = config_.prices.high;
  UcbBreakdown out;

  double rate = 1.0;
  if (dim_x_ > 0) {
    basis_.evaluate_into(action, prepared_features_, x_buffer_);
    const double eta = theta_hat_.dot(x_buffer_);
    if (std::abs(eta) > kMaxExponent) throw NumericOverflow("arrival-rate exponent outside [-700, 700]");
    rate = std::exp(eta);
  }
  choice_probabilities_into(action, scores_, q_buffer_);
  double revenue = 0.0;
  for (int i = 0; i < action.size(); ++i) revenue += action.prices(action.assortment[i]) * q_buffer_(i + 1);
  out.plug_in = L * rate * revenue;

  if (dim_x_ > 0) {
    const double cap = L * (std::exp(x_bar_) - std::exp(-x_bar_));
    const double quad = L * rate * x_buffer_.dot(poisson_inverse_ * x_buffer_);
    const double root =
        quad > 0.0 ? config_.bonus_scale *
                         std::sqrt(L * std::exp((2.0 * constants_.tau_theta + 1.0) * x_bar_) *
                                   constants_.omega_theta * quad)
                   : 0.0;
    out.poisson_cap = ph * cap;
    out.poisson_clamped = root >= cap;
    out.poisson_bonus = ph * std::min(cap, root);
    out.poisson_gap = out.poisson_clamped ? 0.0 : ph * (root - cap);
  }

  const double scale = L * std::exp(x_bar_);
  const int d = static_cast<int>(whitened_.cols());
  Vec mean = Vec::Zero(d);
  for (int i = 0; i < action.size(); ++i) mean += q_buffer_(i + 1) * whitened_.row(action.assortment[i]).transpose();
  Mat b = (q_buffer_(0) * mean) * mean.transpose();
  for (int i = 0; i < action.size(); ++i) {
    const Vec c = whitened_.row(action.assortment[i]).transpose() - mean;
    b.noalias() += q_buffer_(i + 1) * c * c.transpose();
  }
  const double opnorm = std::max(0.0, scale * max_eigenvalue(b));
  const double root = config_.bonus_scale * std::sqrt(constants_.c0 * constants_.omega_v * opnorm);
  out.mnl_cap = scale * ph;
  out.mnl_clamped = root >= ph;
  out.mnl_bonus = scale * std::min(ph, root);
  out.mnl_gap = out.mnl_clamped ? 0.0 : scale * (root - ph);
  return out;
}

// ---------------------------------------------------------------------------

LearnThenEarnPolicy::LearnThenEarnPolicy(PolicyConfig config, bool d_optimal)
    : config_(std::move(config)), d_optimal_(d_optimal) {
  validate_policy_config(config_);
  design_ = build_initial_design(config_);
  if (config_.stage1_length) {
    exploration_ = *config_.stage1_length;
  } else {
    exploration_ = compute_t0_T0(config_.horizon, config_.dim_z, config_.dim_x,
                                 resolve_sigma0(config_, design_))
                       .T0;
  }
  if (d_optimal_ && exploration_ > 0 && config_.feature_variance <= 0.0 &&
      design_.mnl_rank < config_.dim_z) {
    std::ostringstream os;
    os << "D-optimal exploration grid reaches MNL information rank " << design_.mnl_rank
       << " < d_z = " << config_.dim_z;
    throw ConfigError("Assumption 6", os.str());
  }
  information_ = Mat::Zero(config_.dim_z, config_.dim_z);
  v_hat_ = Vec::Zero(config_.dim_z);
}

Action LearnThenEarnPolicy::select(const ProductFeatures& features) {
  const long t = period_ + 1;
  diagnostics_ = PeriodDiagnostics{};
  diagnostics_.period = t;
  diagnostics_.v_hat = v_hat_;
  diagnostics_.theta_hat = Vec::Constant(1, std::log(rate_hat_));
  const double L = config_.base_rate;
  if (t <= exploration_) {
    diagnostics_.stage = "explore";
    if (!d_optimal_) {
      diagnostics_.action = initial_action(design_, t);
      return diagnostics_.action;
    }
    const double ridge = 1e-9 * (1.0 + information_.trace());
    const Mat base = information_ + ridge * Mat::Identity(config_.dim_z, config_.dim_z);
    const ActionObjective objective = [&](const Action& a) {
      const Mat m = base + L * phi_matrix(a, features, v_hat_);
      Eigen::LDLT<Mat> ldlt(m);
      return ldlt.vectorD().array().max(1e-300).log().sum();
    };
    auto best = maximize_over_actions(config_.num_products, config_.assortment_size, config_.prices,
                                      config_.search, objective);
    diagnostics_.action = best.action;
    return best.action;
  }
  diagnostics_.stage = "earn";
  const Vec scores = product_scores(features, v_hat_);
  const ActionObjective objective = [&](const Action& a) {
    return L * rate_hat_ * per_customer_revenue_from_scores(a, scores);
  };
  auto best = maximize_over_actions(config_.num_products, config_.assortment_size, config_.prices,
                                    config_.search, objective, scores);
  diagnostics_.action = best.action;
  diagnostics_.ucb.plug_in = best.value;
  return best.action;
}

void LearnThenEarnPolicy::update(const PeriodObservation& observation) {
  ++period_;
  choices_.add(observation);
  information_ += config_.base_rate * phi_matrix(choices_.periods.back(), v_hat_);
  arrivals_total_ += static_cast<double>(observation.arrivals);
  rate_hat_ = std::max(arrivals_total_, 0.5) / (config_.base_rate * static_cast<double>(period_));
  if (period_ >= exploration_ || d_optimal_) {
    const auto report = maximize_in_ball(mnl_objective(choices_), Vec::Zero(config_.dim_z),
                                         config_.v_bar, v_hat_, config_.solver);
    v_hat_ = report.estimate;
    diagnostics_.v_converged = report.converged;
    diagnostics_.v_iterations = report.iterations;
  }
}

// ---------------------------------------------------------------------------

OraclePolicy::OraclePolicy(ModelParams truth, int assortment_size, SearchConfig search)
    : truth_(std::move(truth)), assortment_size_(assortment_size), search_(search) {}

Action OraclePolicy::select(const ProductFeatures& features) {
  diagnostics_ = PeriodDiagnostics{};
  diagnostics_.period = features.period;
  diagnostics_.stage = "oracle";
  auto best = oracle_best_action(truth_, features, assortment_size_, search_);
  diagnostics_.action = best.action;
  diagnostics_.ucb.plug_in = best.value;
  return best.action;
}

RandomPolicy::RandomPolicy(int num_products, int assortment_size, PriceBounds prices,
                           SearchConfig search, std::uint64_t seed)
    : num_products_(num_products),
      assortment_size_(assortment_size),
      prices_(prices),
      grid_(price_grid(prices, search.grid_points)),
      rng_(std::make_unique<Rng>(seed)) {
  if (assortment_size < 1 || assortment_size > num_products) {
    throw InvalidInput("random policy: need 1 <= K <= N");
  }
  if (num_combinations(num_products, assortment_size) <= search.assortment_limit) {
    assortments_ = enumerate_assortments(num_products, assortment_size);
  }
}

RandomPolicy::~RandomPolicy() = default;

Action RandomPolicy::select(const ProductFeatures& features) {
  std::vector<int> assortment;
  if (!assortments_.empty()) {
    assortment = assortments_[rng_->uniform_index(assortments_.size())];
  } else {
    std::vector<int> pool(num_products_);
    for (int j = 0; j < num_products_; ++j) pool[j] = j;
    for (int i = 0; i < assortment_size_; ++i) {
      const auto pick = i + static_cast<int>(rng_->uniform_index(num_products_ - i));
      std::swap(pool[i], pool[pick]);
    }
    assortment.assign(pool.begin(), pool.begin() + assortment_size_);
    std::sort(assortment.begin(), assortment.end());
  }
  std::vector<double> p(assortment.size());
  for (auto& price : p) price = grid_[rng_->uniform_index(grid_.size())];
  diagnostics_ = PeriodDiagnostics{};
  diagnostics_.period = features.period;
  diagnostics_.stage = "random";
  diagnostics_.action = make_action(assortment, p, num_products_, prices_);
  return diagnostics_.action;
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names = {"pmnl", "fixed_ucb", "learn_then_earn", "oracle",
                                                 "random"};
  return names;
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyContext& context) {
  const auto& c = context.config;
  if (name == "pmnl") return std::make_unique<PmnlPolicy>(c, false);
  if (name == "fixed_ucb") return std::make_unique<PmnlPolicy>(c, true);
  if (name == "learn_then_earn") return std::make_unique<LearnThenEarnPolicy>(c, context.lte_d_optimal);
  if (name == "oracle") return std::make_unique<OraclePolicy>(context.truth, c.assortment_size, c.search);
  if (name == "random") {
    return std::make_unique<RandomPolicy>(c.num_products, c.assortment_size, c.prices, c.search,
                                          context.seed);
  }
  throw InvalidInput("unknown policy '" + std::string(name) + "'");
}

}  // namespace pmnl
