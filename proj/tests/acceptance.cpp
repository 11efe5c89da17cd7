// Acceptance suite: one pass/fail line per criterion. Tolerances and budgets
// are fixed here; a failing criterion is reported as such.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "helpers.hpp"
#include "pmnl/cli.hpp"
#include "pmnl/estimation.hpp"
#include "pmnl/experiment.hpp"
#include "pmnl/scenario.hpp"
#include "pmnl/search.hpp"
#include "pmnl/simulation.hpp"

using namespace pmnl;
using namespace testing;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kProbSumTol = 1e-12;
constexpr double kGradRelTol = 1e-6;
constexpr double kHessianTol = 1e-8;
constexpr double kOrderTol = -1e-10;
constexpr double kThetaErr = 0.1;
constexpr double kVErr = 0.2;
constexpr double kDecayRatio = 0.6;
constexpr double kPmnlGrowth = 1.8;
constexpr double kLinearGrowth = 1.9;
constexpr double kPmnlVsUcb = 0.5;
constexpr double kHighPrice = 0.9;
constexpr double kLowPrice = 0.6;
constexpr double kConstantRate = 1.3;

// Experiment settings shared by criteria 6-9.
constexpr std::uint64_t kSeed = 7;
constexpr int kReps = 20;
constexpr long kHorizon = 1000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

// ---------------------------------------------------------------------------

Verdict probability_normalization() {
  Rng rng(101);
  const PriceBounds bounds{0.5, 4.0};
  double worst = 0.0;
  double smallest = 1.0;
  for (int i = 0; i < 10000; ++i) {
    const int n = 2 + static_cast<int>(rng.uniform_index(7));
    const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    const int d = 1 + static_cast<int>(rng.uniform_index(5));
    const ProductFeatures f = random_features(rng, n, d);
    const Action a = random_action(rng, n, k, bounds);
    const Vec q = choice_probabilities(a, f, random_in_ball(rng, d, 3.0));
    worst = std::max(worst, std::abs(q.sum() - 1.0));
    smallest = std::min(smallest, q.minCoeff());
  }
  return {worst <= kProbSumTol && smallest > 0.0,
          "max |sum - 1| = " + fmt(worst) + ", min q = " + fmt(smallest)};
}

struct SmallHistory {
  ArrivalBasis basis;
  History history;
  double base_rate = 4.0;
};

SmallHistory small_history(std::uint64_t seed, int periods) {
  Rng rng(seed);
  SmallHistory h;
  const int n = 4, k = 2, d = 3;
  const PriceBounds bounds{0.5, 3.0};
  h.basis = ArrivalBasis::price_variety(n, bounds.high);
  Environment env;
  env.truth.basis = h.basis;
  env.truth.theta = random_in_ball(rng, n, 1.0);
  env.truth.v = random_in_ball(rng, d, 1.0);
  env.truth.base_rate = h.base_rate;
  env.truth.prices = bounds;
  env.assortment_size = k;
  for (int t = 1; t <= periods; ++t) {
    ProductFeatures f = random_features(rng, n, d);
    const Action a = random_action(rng, n, k, bounds);
    h.history.append(simulate_period(env, a, f, rng, t));
  }
  return h;
}

Verdict gradient_checks() {
  const SmallHistory h = small_history(202, 60);
  const PoissonData pd = poisson_data(h.history, h.basis, h.base_rate);
  const ChoiceData cd = choice_data(h.history);
  Rng rng(203);
  auto fd = [](const std::function<double(const Vec&)>& f, const Vec& w) {
    Vec g(w.size());
    for (int i = 0; i < w.size(); ++i) {
      const double step = 1e-6 * (1.0 + std::abs(w(i)));
      Vec a = w, b = w;
      a(i) += step;
      b(i) -= step;
      g(i) = (f(a) - f(b)) / (2.0 * step);
    }
    return g;
  };
  double worst_poi = 0.0, worst_mnl = 0.0, worst_hess = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec theta = random_in_ball(rng, 4, 1.0);
    const Vec g = poisson_loglik_grad(theta, pd);
    const Vec n = fd([&](const Vec& w) { return poisson_loglik(w, pd); }, theta);
    worst_poi = std::max(worst_poi, (g - n).norm() / std::max(1.0, n.norm()));
    const Vec v = random_in_ball(rng, 3, 1.0);
    const Vec gv = mnl_loglik_grad(v, cd);
    const Vec nv = fd([&](const Vec& w) { return mnl_loglik(w, cd); }, v);
    worst_mnl = std::max(worst_mnl, (gv - nv).norm() / std::max(1.0, nv.norm()));
  }
  for (int i = 0; i < 10; ++i) {
    const Vec theta = random_in_ball(rng, 4, 1.0);
    const Mat info = poisson_information(theta, pd);
    for (int c = 0; c < 4; ++c) {
      const double step = 1e-5;
      Vec a = theta, b = theta;
      a(c) += step;
      b(c) -= step;
      const Vec col = -(poisson_loglik_grad(a, pd) - poisson_loglik_grad(b, pd)) / (2.0 * step);
      worst_hess = std::max(worst_hess, (col - info.col(c)).cwiseAbs().maxCoeff());
    }
  }
  return {worst_poi <= kGradRelTol && worst_mnl <= kGradRelTol && worst_hess <= kHessianTol,
          "poisson grad rel " + fmt(worst_poi) + ", mnl grad rel " + fmt(worst_mnl) +
              ", hessian max abs " + fmt(worst_hess)};
}

Verdict information_order() {
  double worst_i = 1e300, worst_m = 1e300;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(300 + s);
    const int n = 4, k = 2, d = 3;
    const PriceBounds bounds{0.5, 3.0};
    const ArrivalBasis basis = ArrivalBasis::price_variety(n, bounds.high);
    const double x_bar = basis.norm_bound(k, bounds, d, -1.0, 1.0);
    const Vec theta = random_in_ball(rng, n, 1.0);
    const Vec v = random_in_ball(rng, d, 1.0);
    FisherState state(n, d, 3.0, x_bar);
    for (int t = 1; t <= 15; ++t) {
      PeriodObservation o;
      o.period = t;
      o.action = random_action(rng, n, k, bounds);
      o.features = random_features(rng, n, d);
      o.purchases.assign(k, 0);
      state.accumulate(o, basis, theta, v);
    }
    worst_i = std::min(worst_i, min_eigenvalue(state.mnl_exact(v, theta) - state.mnl_hat_at(v)));
    const Action a = random_action(rng, n, k, bounds);
    const ProductFeatures f = random_features(rng, n, d);
    worst_m = std::min(worst_m, min_eigenvalue(mnl_period_upper(a, f, v, 3.0, x_bar) -
                                               mnl_period_exact(a, f, v, theta, basis, 3.0)));
  }
  return {worst_i >= kOrderTol && worst_m >= kOrderTol,
          "min eig(I - I_hat) = " + fmt(worst_i) + ", min eig(M_hat - M) = " + fmt(worst_m)};
}

Verdict oracle_equivalence() {
  Rng rng(404);
  const PriceBounds bounds{0.5, 3.0};
  SearchConfig search;
  search.grid_points = 5;
  const auto grid = price_grid(bounds, 5);
  int matches = 0;
  for (int i = 0; i < 50; ++i) {
    ModelParams p;
    p.basis = ArrivalBasis::price_variety(3, bounds.high);
    p.theta = random_in_ball(rng, 3, 1.0);
    p.v = random_in_ball(rng, 2, 2.0);
    p.base_rate = 10.0;
    p.prices = bounds;
    const ProductFeatures f = random_features(rng, 3, 2);
    double best = -1e300;
    for (const auto& s : enumerate_assortments(3, 2)) {
      for (double a : grid) {
        for (double b : grid) best = std::max(best, expected_period_revenue(make_action(s, {a, b}, 3, bounds), f, p));
      }
    }
    matches += oracle_best_action(p, f, 2, search).value == best;
  }
  return {matches == 50, std::to_string(matches) + "/50 value-exact"};
}

Verdict mle_consistency() {
  const Scenario s = scenario_sim1();
  const PolicyConfig config = make_policy_config(s);
  const InitialDesign design = build_initial_design(config);
  int good = 0;
  std::vector<double> ratio_theta, ratio_v;
  std::ostringstream errs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Environment env = instantiate(s, 500 + seed, 0);
    Rng features(Rng::stream(500 + seed, 0, 2)), outcomes(Rng::stream(500 + seed, 0, 3));
    History h500, h2000;
    for (long t = 1; t <= 2000; ++t) {
      const ProductFeatures f = env.features.draw(features, t);
      const auto o = simulate_period(env, initial_action(design, t), f, outcomes, t);
      if (t <= 500) h500.append(o);
      h2000.append(o);
    }
    auto errors = [&](const History& h) {
      const auto th = global_mle(LikelihoodKind::Poisson, h, env.truth.basis, s.base_rate, 2, 1.0);
      const auto v = global_mle(LikelihoodKind::Mnl, h, env.truth.basis, s.base_rate, s.dim_z, s.v_bar);
      return std::pair{(th.estimate - env.truth.theta).norm(), (v.estimate - env.truth.v).norm()};
    };
    const auto [t5, v5] = errors(h500);
    const auto [t2, v2] = errors(h2000);
    good += t2 <= kThetaErr && v2 <= kVErr;
    ratio_theta.push_back(t2 / t5);
    ratio_v.push_back(v2 / v5);
  }
  const double rt = percentile(ratio_theta, 0.5), rv = percentile(ratio_v, 0.5);
  return {good >= 9 && rt <= kDecayRatio && rv <= kDecayRatio,
          std::to_string(good) + "/10 seeds within bounds, median error ratio 2000/500: theta " + fmt(rt) +
              ", v " + fmt(rv)};
}

// --- Monte-Carlo criteria -------------------------------------------------

double mean_regret_at(const PolicyRuns& runs, long t) { return runs.bands.mean.at(static_cast<std::size_t>(t - 1)); }

double growth(const PolicyRuns& runs) { return mean_regret_at(runs, 1000) / mean_regret_at(runs, 500); }

const PolicyRuns& find(const ExperimentResult& r, const std::string& name) {
  for (const auto& p : r.runs) {
    if (p.policy == name) return p;
  }
  throw std::runtime_error("missing policy " + name);
}

ExperimentResult experiment(Scenario s, std::vector<std::string> policies) {
  s.horizon = kHorizon;
  ExperimentOptions o;
  o.policies = std::move(policies);
  o.reps = kReps;
  o.seed = kSeed;
  return run_experiment(s, o);
}

Verdict regret_shape(const Scenario& s) {
  const auto r = experiment(s, {"pmnl", "fixed_ucb", "learn_then_earn"});
  const auto& pmnl = find(r, "pmnl");
  const auto& ucb = find(r, "fixed_ucb");
  const auto& lte = find(r, "learn_then_earn");
  const bool a = growth(pmnl) <= kPmnlGrowth;
  const bool b = growth(ucb) >= kLinearGrowth && growth(lte) >= kLinearGrowth;
  const bool c = mean_regret_at(pmnl, 1000) < kPmnlVsUcb * mean_regret_at(ucb, 1000);
  std::ostringstream os;
  os << "(a) " << (a ? "pass" : "FAIL") << " pmnl R(1000)/R(500) = " << fmt(growth(pmnl))
     << "; (b) " << (b ? "pass" : "FAIL") << " fixed_ucb " << fmt(growth(ucb)) << ", learn_then_earn "
     << fmt(growth(lte)) << "; (c) " << (c ? "pass" : "FAIL") << " R(1000) pmnl "
     << fmt(mean_regret_at(pmnl, 1000), 6) << " vs fixed_ucb " << fmt(mean_regret_at(ucb, 1000), 6);
  return {a && b && c, os.str()};
}

double late_median_price(const PolicyRuns& runs) {
  std::vector<double> medians;
  for (const auto& t : runs.traces) medians.push_back(median_chosen_price(t, kHorizon - 100, kHorizon));
  return percentile(medians, 0.5);
}

Verdict pricing_behavior() {
  const Scenario s = scenario_sim1();
  const auto r = experiment(s, {"pmnl", "fixed_ucb"});
  const double ucb = late_median_price(find(r, "fixed_ucb"));
  const double pmnl = late_median_price(find(r, "pmnl"));
  const double ph = s.prices.high;
  return {ucb >= kHighPrice * ph && pmnl <= kLowPrice * ph,
          "median late price fixed_ucb " + fmt(ucb) + " (need >= " + fmt(kHighPrice * ph) + "), pmnl " +
              fmt(pmnl) + " (need <= " + fmt(kLowPrice * ph) + ")"};
}

Verdict constant_rate() {
  const auto r = experiment(constant_rate_variant(scenario_sim1()), {"pmnl", "fixed_ucb"});
  const double pmnl = mean_regret_at(find(r, "pmnl"), 1000);
  const double ucb = mean_regret_at(find(r, "fixed_ucb"), 1000);
  return {pmnl <= kConstantRate * ucb, "R(1000) pmnl " + fmt(pmnl) + " vs fixed_ucb " + fmt(ucb) +
                                           ", ratio " + fmt(pmnl / ucb)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "pmnl_acceptance_determinism";
  fs::remove_all(root);
  auto run = [](const std::vector<std::string>& args) {
    std::vector<const char*> argv{"pmnl"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  const std::string first = (root / "first").string();
  const std::string second = (root / "second").string();
  if (run({"run", "--scenario", "sim2", "--policies", "pmnl,fixed_ucb,learn_then_earn,random", "--reps", "2",
           "--horizon", "120", "--seed", "11", "--out", first}) != kExitOk) {
    return {false, "initial run failed"};
  }
  if (run({"run", "--spec", first + "/manifest.json", "--out", second}) != kExitOk) {
    return {false, "manifest replay failed"};
  }
  int compared = 0, identical = 0;
  for (const auto& e : fs::recursive_directory_iterator(first)) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    identical += slurp(e.path()) == slurp(fs::path(second) / fs::relative(e.path(), first));
  }
  return {compared > 0 && compared == identical,
          std::to_string(identical) + "/" + std::to_string(compared) + " CSV files byte-identical"};
}

Verdict adversarial_sanity() {
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario s = adversarial_instance(AdversarialKind::I, 8, 2, 8, 0.3, std::nullopt, seed);
    const Environment env = instantiate(s, seed, 0);
    ProductFeatures f;
    f.z = s.features.fixed;
    const auto best = oracle_best_action(env.truth, f, s.assortment_size, s.search);
    agree += best.action.assortment == s.adversarial->claimed_optimal;
  }
  return {agree == 20, std::to_string(agree) + "/20 random W match the oracle assortment"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Run only these criteria (1-11)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "probability normalization", 5, probability_normalization},
      {2, "gradient checks", 30, gradient_checks},
      {3, "information matrix order", 30, information_order},
      {4, "oracle equivalence", 10, oracle_equivalence},
      {5, "MLE consistency", 300, mle_consistency},
      {6, "simulation I regret shape", 900, [] { return regret_shape(scenario_sim1()); }},
      {7, "simulation I pricing behavior", 900, pricing_behavior},
      {8, "constant-rate robustness", 600, constant_rate},
      {9, "simulation II regret shape", 900, [] { return regret_shape(scenario_sim2()); }},
      {10, "determinism", 60, determinism},
      {11, "adversarial sanity", 60, adversarial_sanity},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool pass = v.pass && in_budget;
    failures += !pass;
    std::cout << "criterion " << c.id << " [" << (pass ? "PASS" : "FAIL") << "] " << c.name << ": " << v.detail
              << " (" << fmt(seconds, 3) << " s, budget " << c.budget_seconds << " s"
              << (in_budget ? "" : ", over budget") << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
