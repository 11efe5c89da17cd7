#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "policy_fixture.hpp"

using namespace pmnl;
using namespace testing;

namespace {

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("arrival counts match the Poisson mean") {
  const World w = small_world(vec3(0.3, 0.2, -0.2), vec2(0.8, -0.3), 100, 7.0);
  Rng rng(1);
  const ProductFeatures f = w.env.features.draw(rng, 1);
  const Action a = make_action({0, 2}, {1.0, 2.0}, 3, w.config.prices);
  const double mean = 7.0 * arrival_rate(a, f, w.env.truth.theta, w.env.truth.basis);
  const int n = 10000;
  double total = 0.0;
  for (int t = 1; t <= n; ++t) total += simulate_period(w.env, a, f, rng, t).arrivals;
  CHECK(std::abs(total / n - mean) <= 3.0 * std::sqrt(mean / n));
}

TEST_CASE("purchase shares match the choice probabilities") {
  const World w = small_world(vec3(0.3, 0.2, -0.2), vec2(0.8, -0.3), 100, 7.0);
  Rng rng(2);
  const ProductFeatures f = w.env.features.draw(rng, 1);
  const Action a = make_action({0, 1}, {0.7, 1.5}, 3, w.config.prices);
  const auto q = mnl_oracle(a, f, w.env.truth.v);
  double customers = 0.0, none = 0.0;
  std::vector<double> bought(2, 0.0);
  for (int t = 1; t <= 10000; ++t) {
    const auto o = simulate_period(w.env, a, f, rng, t);
    customers += o.arrivals;
    none += o.no_purchase;
    for (int i = 0; i < 2; ++i) bought[i] += o.purchases[i];
  }
  auto within = [&](double count, long double p) {
    const double share = count / customers;
    return std::abs(share - static_cast<double>(p)) <= 3.0 * std::sqrt(static_cast<double>(p * (1 - p)) / customers);
  };
  CHECK(within(none, q[0]));
  CHECK(within(bought[0], q[1]));
  CHECK(within(bought[1], q[2]));
}

TEST_CASE("negligible arrival rate gives empty periods") {
  World w = small_world(vec3(1.0, 0.0, 0.0), vec2(0.8, -0.3), 100, 1e-12);
  Rng rng(3);
  const ProductFeatures f = w.env.features.draw(rng, 1);
  const Action a = make_action({0, 1}, {3.0, 3.0}, 3, w.config.prices);
  for (int t = 1; t <= 100; ++t) {
    const auto o = simulate_period(w.env, a, f, rng, t);
    CHECK(o.arrivals == 0);
    CHECK(o.no_purchase == 0);
  }
}

TEST_CASE("realized revenue is the priced purchase count") {
  const World w = small_world(vec3(0.3, 0.2, -0.2), vec2(0.8, -0.3), 80, 10.0);
  PolicyContext ctx;
  ctx.config = w.config;
  ctx.truth = w.env.truth;
  ctx.seed = 4;
  auto policy = make_policy("random", ctx);
  Rng feature_rng(5), outcome_rng(6);
  const EpisodeContext episode = prepare_episode(w.env, 80, feature_rng);
  Rng replay(6);
  const RegretTrace trace = run_episode(*policy, w.env, episode, outcome_rng);
  REQUIRE(trace.length() == 80);
  for (long t = 0; t < 80; ++t) {
    const auto o = simulate_period(w.env, trace.actions[t], episode.features[t], replay, t + 1);
    double revenue = 0.0;
    for (std::size_t i = 0; i < o.purchases.size(); ++i) {
      revenue += o.action.prices(o.action.assortment[i]) * o.purchases[i];
    }
    CHECK(trace.realized_revenue[t] == revenue);
    CHECK(trace.policy_revenue[t] == expected_period_revenue(trace.actions[t], episode.features[t], w.env.truth));
    if (t > 0) CHECK(trace.cumulative_regret[t] >= trace.cumulative_regret[t - 1]);
  }
}

TEST_CASE("episodes are deterministic given the streams") {
  const World w = small_world(vec3(0.3, 0.2, -0.2), vec2(0.8, -0.3), 60, 10.0);
  auto run = [&] {
    PmnlPolicy policy(w.config);
    Rng features(Rng::stream(9, 0, 2)), outcomes(Rng::stream(9, 0, 3));
    const EpisodeContext episode = prepare_episode(w.env, 60, features);
    const RegretTrace trace = run_episode(policy, w.env, episode, outcomes);
    std::ostringstream os;
    write_trace_csv(os, trace);
    return os.str();
  };
  CHECK(run() == run());
}

TEST_CASE("feature draws respect the configured box and scale") {
  FeatureModel m = FeatureModel::uniform(4, 3, 1.0, 2.0);
  Rng rng(7);
  CHECK(m.max_norm() == doctest::Approx(std::sqrt(12.0)));
  m.scale = m.max_norm();
  for (int t = 0; t < 200; ++t) {
    const auto f = m.draw(rng, t + 1);
    CHECK(f.period == t + 1);
    CHECK_NOTHROW(validate_features(f));
  }
  CHECK(m.coordinate_variance() == doctest::Approx(1.0 / 12.0 / 12.0));
}

TEST_CASE("percentile interpolates linearly") {
  CHECK(percentile({3.0}, 0.9) == 3.0);
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.5) == 3.0);
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.1) == doctest::Approx(1.4));
  CHECK(percentile({5.0, 1.0, 4.0, 2.0, 3.0}, 0.9) == doctest::Approx(4.6));
  CHECK(percentile({0.0, 10.0}, 1.0) == 10.0);
}

TEST_CASE("aggregation bands") {
  const Bands single = aggregate({{1.0, 2.0, 5.0}});
  CHECK(single.mean == std::vector<double>{1.0, 2.0, 5.0});
  CHECK(single.p10 == single.mean);
  CHECK(single.p90 == single.mean);

  const Bands constant = aggregate({{4.0, 4.0}, {4.0, 4.0}, {4.0, 4.0}});
  CHECK(constant.mean == std::vector<double>{4.0, 4.0});

  Rng rng(8);
  std::vector<std::vector<double>> series(37, std::vector<double>(20));
  for (auto& s : series) {
    for (auto& x : s) x = rng.uniform(-5.0, 5.0);
  }
  const Bands b = aggregate(series);
  for (std::size_t t = 0; t < 20; ++t) {
    CHECK(b.p10[t] <= b.p90[t]);
    double sum = 0.0;
    for (const auto& s : series) sum += s[t];
    CHECK(b.mean[t] == doctest::Approx(sum / 37.0));
  }
}

TEST_CASE("csv writers emit headers and LF rows") {
  RegretTrace trace;
  trace.oracle_revenue = {2.0, 2.5};
  trace.policy_revenue = {1.0, 2.5};
  trace.realized_revenue = {0.0, 3.0};
  trace.cumulative_regret = {1.0, 1.0};
  std::ostringstream os;
  write_trace_csv(os, trace);
  CHECK(os.str() == "period,oracle_rev,policy_exp_rev,realized_rev,cum_regret\n1,2,1,0,1\n2,2.5,2.5,3,1\n");
  std::ostringstream bs;
  write_bands_csv(bs, aggregate({{0.1, 0.2}}));
  CHECK(bs.str() == "period,mean,p10,p90\n1,0.1,0.1,0.1\n2,0.2,0.2,0.2\n");
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("median chosen price") {
  RegretTrace trace;
  const PriceBounds p{1.0, 5.0};
  trace.actions = {make_action({0}, {2.0}, 2, p), make_action({1}, {4.0}, 2, p), make_action({0, 1}, {3.0, 1.0}, 2, p)};
  CHECK(median_chosen_price(trace, 0, 3) == doctest::Approx(2.5));
  CHECK(median_chosen_price(trace, 0, 1) == 2.0);
}

}  // TEST_SUITE
