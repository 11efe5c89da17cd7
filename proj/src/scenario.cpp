#include "pmnl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <numeric>
#include <sstream>

#include "pmnl/errors.hpp"

namespace pmnl {

using ojson = nlohmann::ordered_json;

std::string_view to_string(AdversarialKind kind) {
  switch (kind) {
    case AdversarialKind::I: return "I";
    case AdversarialKind::II: return "II";
    case AdversarialKind::III: return "III";
  }
  return "I";
}

AdversarialKind adversarial_kind_from_string(std::string_view name) {
  if (name == "I") return AdversarialKind::I;
  if (name == "II") return AdversarialKind::II;
  if (name == "III") return AdversarialKind::III;
  throw InvalidInput("unknown adversarial instance '" + std::string(name) + "'");
}

Scenario scenario_sim1() {
  Scenario s;
  s.name = "sim1";
  s.description = "Dynamic pricing, N = K = 5, feature-augmented arrivals";
  s.num_products = 5;
  s.assortment_size = 5;
  s.dim_z = 3;
  s.prices = {10.0, 30.0};
  s.base_rate = 20.0;
  s.basis = ArrivalBasis::feature_augmented(30.0, -15.0);
  s.truth.theta = Vec(2);
  s.truth.theta << 0.2, 0.2;
  s.truth.v_kind = TruthSpec::VKind::Uniform;
  s.truth.v_low = 0.0;
  s.truth.v_high = 1.0;
  s.features = FeatureModel::uniform(5, 3, 1.0, 2.0);
  s.v_bar = std::sqrt(3.0);
  s.horizon = 1000;
  s.n_reps = 100;
  s.stage1_length = 10;
  return s;
}

Scenario scenario_sim2() {
  Scenario s = scenario_sim1();
  s.name = "sim2";
  s.description = "Joint assortment and pricing, N = 5, K = 4";
  s.assortment_size = 4;
  s.dim_z = 5;
  s.base_rate = 100.0;
  s.truth.theta << 0.1, 0.1;
  s.features = FeatureModel::uniform(5, 5, 1.0, 2.0);
  s.v_bar = std::sqrt(5.0);
  return s;
}

Scenario price_only_variant(Scenario s) {
  s.name += "_price_only";
  s.description += "; arrivals depend on prices only";
  if (s.truth.theta.size() < 2) throw InvalidInput("price-only variant needs theta = (alpha, beta)");
  s.truth.theta(1) = 0.0;
  return s;
}

Scenario constant_rate_variant(Scenario s) {
  s.name += "_constant_rate";
  s.description += "; constant arrival rate";
  s.truth.theta.setZero();
  return s;
}

namespace {

double entropy(double p) { return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p); }

std::vector<int> draw_subset(int d, int k, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0, kStreamTruth);
  std::vector<int> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int pick = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[i], pool[pick]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> check_subset(std::vector<int> W, int d, int k) {
  std::sort(W.begin(), W.end());
  if (static_cast<int>(W.size()) != k || std::adjacent_find(W.begin(), W.end()) != W.end() ||
      (!W.empty() && (W.front() < 0 || W.back() >= d))) {
    std::ostringstream os;
    os << "W must hold K_bar = " << k << " distinct indices in [0, " << d << ")";
    throw InvalidInput(os.str());
  }
  return W;
}

void require(bool ok, const std::string& inequality) {
  if (!ok) throw InvalidInput("adversarial instance requires " + inequality);
}

}  // namespace

Scenario adversarial_instance(AdversarialKind kind, int dim, int k, int n, double epsilon,
                              std::optional<std::vector<int>> W_opt, std::uint64_t seed) {
  Scenario s;
  AdversarialInfo info;
  info.kind = kind;
  info.epsilon = epsilon;
  s.assortment_size = k;
  s.prices = {1.0, 5.0};
  s.base_rate = 10.0;
  s.horizon = 1000;
  s.n_reps = 20;
  s.v_bar = 1.0;
  s.truth.v_kind = TruthSpec::VKind::Fixed;
  s.truth.fixed_across_reps = true;
  require(k >= 1, "K >= 1");
  require(epsilon >= 0.0, "epsilon >= 0");

  if (kind == AdversarialKind::I || kind == AdversarialKind::III) {
    require(std::min(dim - 2, n) >= k, "min{d - 2, N} >= K");
    info.k_bar = std::min((dim - k + 1) / 3, k);
    info.d = dim - k + info.k_bar;
    require(info.k_bar >= 1, "K_bar = min{floor((d - K + 1)/3), K} >= 1");
  } else {
    require(std::min(dim - 2, n) >= k, "min{d_z - 2, N} >= K");
    require(dim >= 4, "d_z >= 4");
    require(n > dim, "N > d_z");
    const double lhs = std::log(static_cast<double>(n - dim) / k);
    require(lhs >= 0.25 * std::log(3.0) + 4.0 * entropy(0.25),
            "log((N - d_z)/K) >= log(3)/4 + 4 H(1/4)");
    info.d = std::min(static_cast<int>(std::floor((lhs - 0.25 * std::log(3.0)) / entropy(0.25))), dim);
    info.k_bar = (info.d + 1) / 4;
  }
  info.W = W_opt ? check_subset(*W_opt, info.d, info.k_bar) : draw_subset(info.d, info.k_bar, seed);
  info.degenerate = epsilon == 0.0;

  switch (kind) {
    case AdversarialKind::I: {
      require(epsilon <= std::min(s.v_bar / std::sqrt(static_cast<double>(dim)), 1.0),
              "epsilon <= min{v_bar / sqrt(d_z), 1}");
      require(n == dim, "N = d_z (standard-basis catalog)");
      s.name = "adversarial_i";
      s.description = "Worst-case MNL lattice with standard-basis features";
      s.num_products = n;
      s.dim_z = dim;
      s.basis = ArrivalBasis::constant();
      s.truth.theta = Vec(0);
      s.truth.v = Vec::Zero(dim);
      for (int i : info.W) s.truth.v(i) = epsilon;
      for (int i = info.d; i < dim; ++i) s.truth.v(i) = epsilon;
      s.features = FeatureModel::fixed_features(Mat::Identity(n, dim));
      info.claimed_optimal = info.W;
      for (int i = info.d; i < dim; ++i) info.claimed_optimal.push_back(i);
      break;
    }
    case AdversarialKind::II: {
      require(epsilon <= std::min(s.v_bar / std::sqrt(static_cast<double>(info.k_bar)), 1.0),
              "epsilon <= min{v_bar / sqrt(K_bar), 1}");
      s.name = "adversarial_ii";
      s.description = "Worst-case MNL lattice with subset-indicator features";
      s.num_products = n;
      s.dim_z = dim;
      s.basis = ArrivalBasis::constant();
      s.truth.theta = Vec(0);
      s.truth.v = Vec::Zero(dim);
      for (int i : info.W) s.truth.v(i) = epsilon;
      Mat z = Mat::Zero(n, dim);
      int row = 0;
      const double level = 1.0 / std::sqrt(static_cast<double>(info.k_bar));
      for (const auto& U : enumerate_assortments(info.d, info.k_bar)) {
        for (int copy = 0; copy < k; ++copy, ++row) {
          if (row >= n) throw InvalidInput("adversarial instance II: catalog exceeds N");
          for (int i : U) z(row, i) = level;
          if (U == info.W) info.claimed_optimal.push_back(row);
        }
      }
      for (int j = info.d; j < dim; ++j, ++row) {
        if (row >= n) throw InvalidInput("adversarial instance II: catalog exceeds N");
        z(row, j) = epsilon;
      }
      for (; row < n; ++row) z(row, dim - 1) = epsilon;
      s.features = FeatureModel::fixed_features(z);
      break;
    }
    case AdversarialKind::III: {
      require(epsilon < 1.0 / std::sqrt(static_cast<double>(k)), "epsilon < 1/sqrt(K)");
      require(n >= dim, "N >= d_x");
      s.name = "adversarial_iii";
      s.description = "Worst-case arrival lattice with assortment-indicator statistics";
      s.num_products = n;
      s.dim_z = 1;
      const double x_bar = 1.0;
      s.basis = ArrivalBasis::assortment_indicator(dim, x_bar, k);
      s.x_bar = x_bar;
      s.truth.theta = Vec::Zero(dim);
      for (int i : info.W) s.truth.theta(i) = epsilon;
      for (int i = info.d; i < dim; ++i) s.truth.theta(i) = epsilon;
      s.truth.v = Vec::Zero(1);
      s.features = FeatureModel::fixed_features(Mat::Constant(n, 1, 0.5));
      info.claimed_optimal = info.W;
      for (int i = info.d; i < dim; ++i) info.claimed_optimal.push_back(i);
      break;
    }
  }
  std::sort(info.claimed_optimal.begin(), info.claimed_optimal.end());
  if (info.degenerate) info.claimed_optimal.clear();
  s.adversarial = info;
  return s;
}

const std::vector<std::string>& shipped_scenario_names() {
  static const std::vector<std::string> names = {
      "sim1", "sim1_price_only", "sim1_constant_rate", "sim2",
      "adversarial_i", "adversarial_ii", "adversarial_iii"};
  return names;
}

Scenario scenario_by_name(std::string_view name) {
  if (name == "sim1") return scenario_sim1();
  if (name == "sim1_price_only") return price_only_variant(scenario_sim1());
  if (name == "sim1_constant_rate") return constant_rate_variant(scenario_sim1());
  if (name == "sim2") return scenario_sim2();
  if (name == "adversarial_i") return adversarial_instance(AdversarialKind::I, 8, 2, 8, 0.3, std::vector<int>{2, 5});
  if (name == "adversarial_ii") {
    return adversarial_instance(AdversarialKind::II, 4, 1, 40, 0.3, std::vector<int>{2});
  }
  if (name == "adversarial_iii") {
    return adversarial_instance(AdversarialKind::III, 8, 2, 8, 0.3, std::vector<int>{2, 5});
  }
  throw InvalidInput("unknown scenario '" + std::string(name) + "'");
}

Scenario effective_scenario(const Scenario& s) {
  if (!s.normalize_features) return s;
  Scenario out = s;
  FeatureModel raw = s.features;
  raw.scale = 1.0;
  const double factor = raw.max_norm();
  if (!(factor > 0.0)) return out;
  out.features.scale = factor;
  out.basis = s.basis.with_feature_scale(factor);
  return out;
}

namespace {

std::pair<double, double> feature_box(const FeatureModel& f) {
  if (f.kind == FeatureModel::Kind::Uniform) return {f.low / f.scale, f.high / f.scale};
  if (f.fixed.size() == 0) return {0.0, 0.0};
  return {f.fixed.minCoeff() / f.scale, f.fixed.maxCoeff() / f.scale};
}

double x_norm_bound(const Scenario& eff) {
  if (eff.basis.kind() == BasisKind::FeatureAugmented && eff.features.kind == FeatureModel::Kind::Fixed) {
    // Exact over the catalog: the feature term of the worst assortment.
    double worst = 0.0;
    for (const auto& S : enumerate_assortments(eff.num_products, eff.assortment_size)) {
      double term = 0.0;
      for (int j : S) {
        for (int d = 0; d < eff.dim_z; ++d) {
          const double arg = eff.basis.a() * eff.features.fixed(j, d) / eff.features.scale + eff.basis.b();
          if (!(arg > 0.0)) throw InvalidInput("feature_augmented basis: a*z + b must be positive");
          term += std::log(arg);
        }
      }
      worst = std::max(worst, std::abs(term));
    }
    const double k = eff.assortment_size;
    const double price_part =
        k * std::max(std::abs(std::log(eff.prices.low)), std::abs(std::log(eff.prices.high)));
    return std::hypot(price_part, worst);
  }
  const auto [lo, hi] = feature_box(eff.features);
  return eff.basis.norm_bound(eff.assortment_size, eff.prices, eff.dim_z, lo, hi);
}

}  // namespace

double resolved_x_bar(const Scenario& s) {
  if (s.x_bar) return *s.x_bar;
  return x_norm_bound(effective_scenario(s));
}

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport report;
  {
    std::ostringstream os;
    if (s.assortment_size < 1 || s.num_products < s.assortment_size) {
      os << "need 1 <= K <= N, got K = " << s.assortment_size << ", N = " << s.num_products;
      throw ConfigError("Assumption 1", os.str());
    }
  }
  if (!(s.prices.low > 0.0 && s.prices.low < s.prices.high)) {
    std::ostringstream os;
    os << "need 0 < p_l < p_h, got p_l = " << s.prices.low << ", p_h = " << s.prices.high;
    throw ConfigError("Assumption 2", os.str());
  }
  if (!(s.v_bar > 0.0)) throw ConfigError("Assumption 3", "v_bar must be positive");
  if (s.truth.v_kind == TruthSpec::VKind::Fixed) {
    if (s.truth.v.size() != s.dim_z) throw InvalidInput("truth v must have d_z entries");
    if (s.truth.v.norm() > s.v_bar + 1e-12) {
      std::ostringstream os;
      os << "||v*|| = " << s.truth.v.norm() << " exceeds v_bar = " << s.v_bar;
      throw ConfigError("Assumption 3", os.str());
    }
  } else {
    if (!(s.truth.v_low <= s.truth.v_high)) throw InvalidInput("truth v range needs low <= high");
    const double worst = std::sqrt(static_cast<double>(s.dim_z)) *
                         std::max(std::abs(s.truth.v_low), std::abs(s.truth.v_high));
    if (worst > s.v_bar + 1e-12) {
      std::ostringstream os;
      os << "draws of v* can reach norm " << worst << " > v_bar = " << s.v_bar;
      throw ConfigError("Assumption 3", os.str());
    }
  }
  if (s.truth.theta.norm() > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "||theta*|| = " << s.truth.theta.norm() << " exceeds 1";
    throw ConfigError("Assumption 4", os.str());
  }
  if (s.basis.dim() != s.truth.theta.size()) {
    std::ostringstream os;
    os << "arrival basis '" << s.basis.id() << "' has dimension " << s.basis.dim()
       << " but theta* has " << s.truth.theta.size() << " entries";
    throw InvalidInput(os.str());
  }
  if (!(s.base_rate > 0.0)) throw InvalidInput("base rate Lambda must be positive");
  if (s.horizon < 1) throw InvalidInput("horizon must be at least 1");
  if (s.n_reps < 1) throw InvalidInput("n_reps must be at least 1");
  if (s.features.num_products != s.num_products || s.features.dim != s.dim_z) {
    throw InvalidInput("feature model must be N x d_z");
  }

  const Scenario eff = effective_scenario(s);
  report.x_norm_bound = x_norm_bound(eff);
  report.x_bar = s.x_bar ? *s.x_bar : report.x_norm_bound;
  if (report.x_norm_bound > report.x_bar * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "||x(S, p)|| can reach " << report.x_norm_bound << " > x_bar = " << report.x_bar;
    throw ConfigError("Assumption 5", os.str());
  }
  if (s.basis.dim() > 0 && !(report.x_bar > 0.0)) {
    throw ConfigError("Assumption 5", "x_bar must be positive");
  }
  const double norm = eff.features.max_norm();
  if (norm > 1.0 + 1e-12) {
    report.feature_norm_exception = true;
    std::ostringstream os;
    os << "Assumption 6 exception: feature vectors can reach norm " << norm
       << " > 1 (experiment followed as printed; --normalize-features gives a conforming run)";
    report.warnings.push_back(os.str());
  }
  if (s.adversarial && s.adversarial->degenerate) {
    report.warnings.push_back("degenerate instance: epsilon = 0 collapses the lattice to one point");
  }
  return report;
}

Environment instantiate(const Scenario& s, std::uint64_t seed, long replication) {
  const Scenario eff = effective_scenario(s);
  Environment env;
  env.truth.theta = eff.truth.theta;
  if (eff.truth.v_kind == TruthSpec::VKind::Fixed) {
    env.truth.v = eff.truth.v;
  } else {
    Rng rng = Rng::stream(seed, eff.truth.fixed_across_reps ? 0 : replication, kStreamTruth);
    env.truth.v.resize(eff.dim_z);
    for (int d = 0; d < eff.dim_z; ++d) env.truth.v(d) = rng.uniform(eff.truth.v_low, eff.truth.v_high);
  }
  env.truth.base_rate = eff.base_rate;
  env.truth.x_bar = resolved_x_bar(eff);
  env.truth.v_bar = eff.v_bar;
  env.truth.prices = eff.prices;
  env.truth.basis = eff.basis;
  env.features = eff.features;
  env.assortment_size = eff.assortment_size;
  env.search = eff.search;
  return env;
}

PolicyConfig make_policy_config(const Scenario& s) {
  const Scenario eff = effective_scenario(s);
  PolicyConfig c;
  c.horizon = eff.horizon;
  c.base_rate = eff.base_rate;
  c.x_bar = resolved_x_bar(eff);
  c.v_bar = eff.v_bar;
  c.sigma0 = eff.sigma0.value_or(0.0);
  c.sigma1 = eff.sigma1.value_or(0.0);
  c.dim_z = eff.dim_z;
  c.dim_x = eff.basis.dim();
  c.assortment_size = eff.assortment_size;
  c.num_products = eff.num_products;
  c.prices = eff.prices;
  c.basis = eff.basis;
  c.search = eff.search;
  c.reference_features = eff.features.mean();
  c.feature_variance = eff.features.coordinate_variance();
  c.stage1_length = eff.stage1_length;
  c.bonus_scale = eff.bonus_scale;
  c.refresh_every = eff.refresh_every;
  c.fisher_mode = eff.fisher_mode;
  return c;
}

// ---------------------------------------------------------------------------

namespace {

ojson vec_json(const Vec& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec json_vec(const ojson& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

ojson mat_json(const Mat& m) {
  ojson a = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

Mat json_mat(const ojson& a) {
  if (a.empty()) return Mat();
  Mat m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a[0].size()));
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != a[0].size()) throw InvalidInput("ragged feature matrix");
    for (std::size_t c = 0; c < a[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r][c].get<double>();
    }
  }
  return m;
}

ojson basis_json(const ArrivalBasis& b) {
  ojson j;
  j["kind"] = std::string(b.id());
  switch (b.kind()) {
    case BasisKind::Constant: break;
    case BasisKind::PriceVariety:
      j["num_products"] = b.num_products();
      j["p_high"] = b.price_high();
      break;
    case BasisKind::Pairwise: j["num_products"] = b.num_products(); break;
    case BasisKind::FeatureAugmented:
      j["a"] = b.a();
      j["b"] = b.b();
      break;
    case BasisKind::AssortmentIndicator:
      j["dim_x"] = b.indicator_dim();
      j["scale"] = b.scale();
      j["assortment_size"] = b.assortment_size();
      break;
  }
  return j;
}

ArrivalBasis json_basis(const ojson& j) {
  switch (basis_kind_from_string(j.at("kind").get<std::string>())) {
    case BasisKind::Constant: return ArrivalBasis::constant();
    case BasisKind::PriceVariety:
      return ArrivalBasis::price_variety(j.at("num_products").get<int>(), j.at("p_high").get<double>());
    case BasisKind::Pairwise: return ArrivalBasis::pairwise(j.at("num_products").get<int>());
    case BasisKind::FeatureAugmented:
      return ArrivalBasis::feature_augmented(j.at("a").get<double>(), j.at("b").get<double>());
    case BasisKind::AssortmentIndicator:
      return ArrivalBasis::assortment_indicator(j.at("dim_x").get<int>(), j.at("scale").get<double>(),
                                                j.at("assortment_size").get<int>());
  }
  return ArrivalBasis::constant();
}

template <typename T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <typename T>
std::optional<T> json_optional(const ojson& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  ojson j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["num_products"] = s.num_products;
  j["assortment_size"] = s.assortment_size;
  j["dim_z"] = s.dim_z;
  j["prices"] = {{"low", s.prices.low}, {"high", s.prices.high}};
  j["base_rate"] = s.base_rate;
  j["basis"] = basis_json(s.basis);
  ojson truth;
  truth["theta"] = vec_json(s.truth.theta);
  if (s.truth.v_kind == TruthSpec::VKind::Fixed) {
    truth["v"] = {{"kind", "fixed"}, {"values", vec_json(s.truth.v)}};
  } else {
    truth["v"] = {{"kind", "uniform"}, {"low", s.truth.v_low}, {"high", s.truth.v_high}};
  }
  truth["fixed_across_reps"] = s.truth.fixed_across_reps;
  j["truth"] = truth;
  if (s.features.kind == FeatureModel::Kind::Fixed) {
    j["features"] = {{"kind", "fixed"}, {"values", mat_json(s.features.fixed)}};
  } else {
    j["features"] = {{"kind", "uniform"}, {"low", s.features.low}, {"high", s.features.high}};
  }
  j["normalize_features"] = s.normalize_features;
  j["v_bar"] = s.v_bar;
  j["x_bar"] = optional_json(s.x_bar);
  j["horizon"] = s.horizon;
  j["n_reps"] = s.n_reps;
  j["stage1_length"] = optional_json(s.stage1_length);
  j["sigma0"] = optional_json(s.sigma0);
  j["sigma1"] = optional_json(s.sigma1);
  j["search"] = {{"grid_points", s.search.grid_points},
                 {"price_enumeration_limit", s.search.price_enumeration_limit},
                 {"assortment_limit", s.search.assortment_limit},
                 {"heuristic_assortments", s.search.heuristic_assortments},
                 {"refine", s.search.refine},
                 {"refine_sweeps", s.search.refine_sweeps},
                 {"max_coordinate_sweeps", s.search.max_coordinate_sweeps}};
  j["policy"] = {{"bonus_scale", s.bonus_scale},
                 {"refresh_every", s.refresh_every},
                 {"fisher_mode", s.fisher_mode == FisherMode::Exact ? "exact" : "incremental"},
                 {"lte_d_optimal", s.lte_d_optimal}};
  if (s.adversarial) {
    const auto& a = *s.adversarial;
    j["adversarial"] = {{"instance", std::string(to_string(a.kind))},
                        {"epsilon", a.epsilon},
                        {"d", a.d},
                        {"k_bar", a.k_bar},
                        {"W", a.W},
                        {"claimed_optimal", a.claimed_optimal},
                        {"degenerate", a.degenerate}};
  }
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("scenario file is not valid JSON: ") + e.what());
  }
  try {
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.description = j.value("description", "");
    s.num_products = j.at("num_products").get<int>();
    s.assortment_size = j.at("assortment_size").get<int>();
    s.dim_z = j.at("dim_z").get<int>();
    s.prices = {j.at("prices").at("low").get<double>(), j.at("prices").at("high").get<double>()};
    s.base_rate = j.at("base_rate").get<double>();
    s.basis = json_basis(j.at("basis"));
    const auto& truth = j.at("truth");
    s.truth.theta = json_vec(truth.at("theta"));
    const auto& v = truth.at("v");
    if (v.at("kind").get<std::string>() == "fixed") {
      s.truth.v_kind = TruthSpec::VKind::Fixed;
      s.truth.v = json_vec(v.at("values"));
    } else if (v.at("kind").get<std::string>() == "uniform") {
      s.truth.v_kind = TruthSpec::VKind::Uniform;
      s.truth.v_low = v.at("low").get<double>();
      s.truth.v_high = v.at("high").get<double>();
    } else {
      throw InvalidInput("truth.v.kind must be 'fixed' or 'uniform'");
    }
    s.truth.fixed_across_reps = truth.value("fixed_across_reps", false);
    const auto& f = j.at("features");
    if (f.at("kind").get<std::string>() == "fixed") {
      s.features = FeatureModel::fixed_features(json_mat(f.at("values")));
    } else if (f.at("kind").get<std::string>() == "uniform") {
      s.features = FeatureModel::uniform(s.num_products, s.dim_z, f.at("low").get<double>(),
                                         f.at("high").get<double>());
    } else {
      throw InvalidInput("features.kind must be 'fixed' or 'uniform'");
    }
    s.normalize_features = j.value("normalize_features", false);
    s.v_bar = j.at("v_bar").get<double>();
    s.x_bar = json_optional<double>(j, "x_bar");
    s.horizon = j.at("horizon").get<long>();
    s.n_reps = j.at("n_reps").get<int>();
    s.stage1_length = json_optional<long>(j, "stage1_length");
    s.sigma0 = json_optional<double>(j, "sigma0");
    s.sigma1 = json_optional<double>(j, "sigma1");
    if (j.contains("search")) {
      const auto& sc = j.at("search");
      s.search.grid_points = sc.value("grid_points", s.search.grid_points);
      s.search.price_enumeration_limit = sc.value("price_enumeration_limit", s.search.price_enumeration_limit);
      s.search.assortment_limit = sc.value("assortment_limit", s.search.assortment_limit);
      s.search.heuristic_assortments = sc.value("heuristic_assortments", s.search.heuristic_assortments);
      s.search.refine = sc.value("refine", s.search.refine);
      s.search.refine_sweeps = sc.value("refine_sweeps", s.search.refine_sweeps);
      s.search.max_coordinate_sweeps = sc.value("max_coordinate_sweeps", s.search.max_coordinate_sweeps);
    }
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      s.bonus_scale = p.value("bonus_scale", 1.0);
      s.refresh_every = p.value("refresh_every", 1);
      const auto mode = p.value("fisher_mode", std::string("exact"));
      if (mode != "exact" && mode != "incremental") {
        throw InvalidInput("policy.fisher_mode must be 'exact' or 'incremental'");
      }
      s.fisher_mode = mode == "exact" ? FisherMode::Exact : FisherMode::Incremental;
      s.lte_d_optimal = p.value("lte_d_optimal", false);
    }
    if (j.contains("adversarial")) {
      const auto& a = j.at("adversarial");
      AdversarialInfo info;
      info.kind = adversarial_kind_from_string(a.at("instance").get<std::string>());
      info.epsilon = a.at("epsilon").get<double>();
      info.d = a.at("d").get<int>();
      info.k_bar = a.at("k_bar").get<int>();
      info.W = a.at("W").get<std::vector<int>>();
      info.claimed_optimal = a.at("claimed_optimal").get<std::vector<int>>();
      info.degenerate = a.value("degenerate", false);
      s.adversarial = info;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& ref) {
  const auto& names = shipped_scenario_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) return scenario_by_name(ref);
  std::ifstream in(ref);
  if (!in) throw InvalidInput("scenario '" + ref + "' is neither a shipped name nor a readable file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json(buffer.str());
}

}  // namespace pmnl
