#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "pmnl/errors.hpp"
#include "pmnl/search.hpp"

using namespace pmnl;
using namespace testing;

TEST_SUITE("model") {

TEST_CASE("logit at zero utility splits evenly") {
  ProductFeatures f;
  f.z = Mat::Zero(1, 1);
  const Action a = make_action({0}, {1.0}, 1, {0.5, 2.0});
  Vec v(1);
  v << 1.0;
  f.z(0, 0) = 1.0;  // v'z - p = 0
  const Vec q = choice_probabilities(a, f, v);
  CHECK(q(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("choke prices send every customer to the outside option") {
  ProductFeatures f;
  f.z = Mat::Zero(2, 1);
  const Action a = make_action({0, 1}, {700.0, 700.0}, 2, {1.0, 700.0});
  const Vec q = choice_probabilities(a, f, Vec::Zero(1));
  CHECK(q(0) == doctest::Approx(1.0).epsilon(1e-300));
  CHECK(q(1) > 0.0);
  CHECK(q(1) < 1e-300);
  CHECK(per_customer_revenue(a, f, Vec::Zero(1)) < 1e-200);
}

TEST_CASE("probabilities match extended-precision evaluation") {
  Rng rng(11);
  Vec v(3);
  v << 0.3, -0.2, 0.1;
  for (int trial = 0; trial < 200; ++trial) {
    ProductFeatures f;
    f.z = Mat(5, 3);
    for (int j = 0; j < 5; ++j)
      for (int d = 0; d < 3; ++d) f.z(j, d) = rng.uniform(1.0, 2.0);
    const Action a = random_action(rng, 5, 1 + trial % 5, {10.0, 30.0});
    const Vec q = choice_probabilities(a, f, v);
    const auto oracle = mnl_oracle(a, f, v);
    double sum = 0.0;
    for (int i = 0; i < q.size(); ++i) {
      CHECK(std::abs(q(i) - static_cast<double>(oracle[i])) <= 1e-15 * std::max(1.0L, oracle[i]) + 1e-300);
      CHECK(q(i) > 0.0);
      sum += q(i);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("relative odds do not depend on the other products") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const ProductFeatures f = random_features(rng, 4, 2);
    const Vec v = random_in_ball(rng, 2, 2.0);
    const Action a = random_action(rng, 4, 3, {0.5, 3.0});
    Action b = a;
    b.prices(a.assortment[2]) = a.prices(a.assortment[2]) + 1.0;
    const Vec qa = choice_probabilities(a, f, v);
    const Vec qb = choice_probabilities(b, f, v);
    CHECK(qa(1) / qa(2) == doctest::Approx(qb(1) / qb(2)).epsilon(1e-13));
  }
}

TEST_CASE("utility exponent beyond 700 raises NumericOverflow") {
  ProductFeatures f;
  f.z = Mat::Zero(1, 1);
  const Action a = make_action({0}, {701.0}, 1, {1.0, 800.0});
  CHECK_THROWS_AS(choice_probabilities(a, f, Vec::Zero(1)), NumericOverflow);
}

TEST_CASE("dimension mismatches raise InvalidInput") {
  ProductFeatures f;
  f.z = Mat::Zero(2, 2);
  const Action a = make_action({0}, {1.0}, 2, {1.0, 2.0});
  CHECK_THROWS_AS(choice_probabilities(a, f, Vec::Zero(3)), InvalidInput);
  CHECK_THROWS_AS(arrival_rate(a, f, Vec::Zero(1), ArrivalBasis::constant()), InvalidInput);
}

TEST_CASE("action validation") {
  const PriceBounds b{1.0, 2.0};
  const Action ok = make_action({2, 0}, {1.5, 1.2}, 3, b);
  CHECK(ok.assortment == std::vector<int>{0, 2});
  CHECK(ok.prices(0) == 1.2);
  CHECK(ok.prices(1) == 2.0);  // out of assortment carries p_h
  CHECK_NOTHROW(validate_action(ok, 3, 2, b));
  CHECK_THROWS_AS(validate_action(ok, 3, 1, b), InvalidInput);
  Action bad = ok;
  bad.prices(0) = 0.5;
  CHECK_THROWS_AS(validate_action(bad, 3, 2, b), InvalidInput);
  CHECK_THROWS_AS(make_action({0, 0}, {1.0, 1.0}, 3, b), InvalidInput);
  CHECK_THROWS_AS(make_action({5}, {1.0}, 3, b), InvalidInput);
}

TEST_CASE("feature validation enforces unit norm") {
  ProductFeatures f;
  f.z = Mat::Constant(2, 2, 0.7);
  CHECK_NOTHROW(validate_features(f));
  f.z(1, 1) = 0.8;
  CHECK_THROWS_AS(validate_features(f), InvalidInput);
}

TEST_CASE("arrival rate of a zero parameter is one") {
  Rng rng(3);
  const ArrivalBasis basis = ArrivalBasis::pairwise(3);
  const ProductFeatures f = random_features(rng, 3, 2);
  for (int i = 0; i < 10; ++i) {
    const Action a = random_action(rng, 3, 2, {1.0, 4.0});
    CHECK(arrival_rate(a, f, Vec::Zero(basis.dim()), basis) == 1.0);
  }
}

TEST_CASE("price-variety basis") {
  const double ph = 5.0;
  const ArrivalBasis basis = ArrivalBasis::price_variety(3, ph);
  ProductFeatures f;
  f.z = Mat::Zero(3, 1);
  const Action top = make_action({0, 1}, {ph, ph}, 3, {1.0, ph});
  CHECK(basis.evaluate(top, f).norm() == 0.0);
  Vec alpha = Vec::Constant(3, 0.2);
  CHECK(arrival_rate(top, f, alpha, basis) == 1.0);
  const Action one = make_action({0}, {ph / std::numbers::e}, 3, {1.0, ph});
  CHECK(basis.evaluate(one, f)(0) == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const Action a = random_action(rng, 3, 2, {1.0, ph});
    const Vec x = basis_price_variety(a, 3, ph);
    for (int i = 0; i < 3; ++i) {
      const bool in = std::find(a.assortment.begin(), a.assortment.end(), i) != a.assortment.end();
      CHECK(x(i) == doctest::Approx(in ? -std::log(a.prices(i) / ph) : 0.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("pairwise basis") {
  const int n = 4;
  const ArrivalBasis basis = ArrivalBasis::pairwise(n);
  CHECK(basis.dim() == n + n * (n - 1));
  ProductFeatures f;
  f.z = Mat::Zero(n, 1);
  const Action single = make_action({2}, {2.0}, n, {1.0, 3.0});
  const Vec xs = basis_pairwise(single, n);
  CHECK(xs.tail(n * (n - 1)).norm() == 0.0);
  CHECK(xs(2) == doctest::Approx(0.5));

  const Action equal = make_action({0, 1}, {2.0, 2.0}, n, {1.0, 3.0});
  const Vec xe = basis_pairwise(equal, n);
  // ordered pairs (0,1) and (1,0)
  CHECK(xe(n + 0 * (n - 1) + 0) == 1.0);
  CHECK(xe(n + 1 * (n - 1) + 0) == 1.0);

  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Action a = random_action(rng, n, 3, {1.0, 3.0});
    const Vec x = basis.evaluate(a, f);
    std::vector<double> oracle;
    for (int i = 0; i < n; ++i) {
      const bool in_i = std::find(a.assortment.begin(), a.assortment.end(), i) != a.assortment.end();
      oracle.push_back(in_i ? 1.0 / a.prices(i) : 0.0);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const bool in_i = std::find(a.assortment.begin(), a.assortment.end(), i) != a.assortment.end();
        const bool in_j = std::find(a.assortment.begin(), a.assortment.end(), j) != a.assortment.end();
        oracle.push_back(in_i && in_j ? a.prices(i) / a.prices(j) : 0.0);
      }
    }
    REQUIRE(x.size() == static_cast<int>(oracle.size()));
    for (int i = 0; i < x.size(); ++i) CHECK(x(i) == doctest::Approx(oracle[i]).epsilon(1e-15));
  }
}

TEST_CASE("feature-augmented basis") {
  ProductFeatures f;
  f.z = Mat::Constant(1, 1, 1.0);
  const Action unit = make_action({0}, {1.0}, 1, {0.5, 2.0});
  CHECK(basis_feature_augmented(unit, f, 0.0, 1.0).norm() == 0.0);
  const Action e_price = make_action({0}, {std::numbers::e}, 1, {1.0, 3.0});
  const Vec x = basis_feature_augmented(e_price, f, std::numbers::e - 1.0, 1.0);
  CHECK(x(0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-15));

  f.z = Mat::Constant(1, 1, 0.1);
  CHECK_THROWS_AS(basis_feature_augmented(unit, f, 30.0, -15.0), InvalidInput);

  // Arrival rate with (alpha, beta) = (0.2, 0.2), a = 30, b = -15 on a seeded draw.
  Rng rng(21);
  ProductFeatures g;
  g.z.resize(5, 3);
  for (int j = 0; j < 5; ++j)
    for (int d = 0; d < 3; ++d) g.z(j, d) = rng.uniform(1.0, 2.0);
  const Action a = random_action(rng, 5, 5, {10.0, 30.0});
  long double log_rate = 0.0L;
  for (int j = 0; j < 5; ++j) {
    log_rate -= 0.2L * std::log(static_cast<long double>(a.prices(j)));
    for (int d = 0; d < 3; ++d) log_rate += 0.2L * std::log(30.0L * g.z(j, d) - 15.0L);
  }
  Vec theta(2);
  theta << 0.2, 0.2;
  const double rate = arrival_rate(a, g, theta, ArrivalBasis::feature_augmented(30.0, -15.0));
  CHECK(rate == doctest::Approx(static_cast<double>(std::exp(log_rate))).epsilon(1e-13));
}

TEST_CASE("assortment-indicator basis") {
  const ArrivalBasis basis = ArrivalBasis::assortment_indicator(4, 2.0, 2);
  ProductFeatures f;
  f.z = Mat::Zero(6, 1);
  const Action a = make_action({1, 5}, {1.0, 1.0}, 6, {1.0, 2.0});
  const Vec x = basis.evaluate(a, f);
  CHECK(x.size() == 4);
  CHECK(x(1) == doctest::Approx(2.0 / std::sqrt(2.0)));
  CHECK(x(0) == 0.0);
  CHECK(x(3) == 0.0);
}

TEST_CASE("arrival rate stays inside the envelope") {
  Rng rng(8);
  const PriceBounds b{1.0, 4.0};
  const ArrivalBasis basis = ArrivalBasis::price_variety(4, b.high);
  ProductFeatures f;
  f.z = Mat::Zero(4, 1);
  const double x_bar = basis.norm_bound(2, b, 1, 0.0, 0.0);
  for (int t = 0; t < 200; ++t) {
    const Vec theta = random_in_ball(rng, 4, 1.0);
    const Action a = random_action(rng, 4, 2, b);
    CHECK(basis.evaluate(a, f).norm() <= x_bar * (1 + 1e-12));
    const double rate = arrival_rate(a, f, theta, basis);
    CHECK(rate <= std::exp(x_bar * theta.norm()) * (1 + 1e-12));
    CHECK(rate >= std::exp(-x_bar * theta.norm()) * (1 - 1e-12));
  }
}

TEST_CASE("per-customer revenue") {
  ProductFeatures f;
  f.z = Mat::Zero(1, 1);
  const Action a = make_action({0}, {3.0}, 1, {1.0, 4.0});
  Vec v(1);
  v << 0.0;
  f.z(0, 0) = 0.0;
  // utility 0 - 3 is not zero; use a feature that cancels the price
  f.z(0, 0) = 1.0;
  v(0) = 3.0;
  CHECK(per_customer_revenue(a, f, v) == doctest::Approx(1.5).epsilon(1e-15));

  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const ProductFeatures g = random_features(rng, 6, 3);
    const Vec w = random_in_ball(rng, 3, 2.0);
    const Action b = random_action(rng, 6, 4, {0.5, 3.0});
    const double r = per_customer_revenue(b, g, w);
    CHECK(r == doctest::Approx(static_cast<double>(revenue_oracle(b, g, w))).epsilon(1e-14));
    const Vec q = choice_probabilities(b, g, w);
    CHECK(r <= 3.0 * (1.0 - q(0)) * (1 + 1e-14));
  }
}

TEST_CASE("expected period revenue composes the two sub-models") {
  ModelParams params;
  params.theta = Vec::Zero(0);
  params.v = Vec::Constant(1, 2.0);
  params.base_rate = 2.0;
  params.prices = {1.0, 3.0};
  ProductFeatures f;
  f.z = Mat::Constant(1, 1, 1.0);
  const Action a = make_action({0}, {2.0}, 1, params.prices);
  CHECK(expected_period_revenue(a, f, params) == doctest::Approx(2.0).epsilon(1e-15));

  Rng rng(33);
  params.theta = Vec(2);
  params.theta << 0.1, 0.1;
  params.basis = ArrivalBasis::feature_augmented(30.0, -15.0);
  params.base_rate = 100.0;
  params.prices = {10.0, 30.0};
  params.v = random_vec(rng, 5, 0.0, 1.0);
  ProductFeatures g;
  g.z.resize(5, 5);
  for (int j = 0; j < 5; ++j)
    for (int d = 0; d < 5; ++d) g.z(j, d) = rng.uniform(1.0, 2.0);
  const Action b = random_action(rng, 5, 4, params.prices);
  const double composed = params.base_rate * arrival_rate(b, g, params.theta, params.basis) *
                          per_customer_revenue(b, g, params.v);
  CHECK(expected_period_revenue(b, g, params) == doctest::Approx(composed).epsilon(1e-15));
}

TEST_CASE("instantaneous regret") {
  Rng rng(12);
  ModelParams params;
  params.theta = Vec::Zero(0);
  params.v = random_in_ball(rng, 2, 1.0);
  params.base_rate = 3.0;
  params.prices = {0.5, 3.0};
  const ProductFeatures f = random_features(rng, 3, 2);
  SearchConfig cfg;
  cfg.grid_points = 5;
  const ScoredAction best = oracle_best_action(params, f, 2, cfg);
  CHECK(instantaneous_regret(best.action, params, f, best.value) == 0.0);
  for (int t = 0; t < 20; ++t) {
    const Action a = random_action(rng, 3, 2, params.prices);
    const double direct = best.value - expected_period_revenue(a, f, params);
    CHECK(instantaneous_regret(a, params, f, best.value) == direct);
  }
  params.prices = {0.5, 699.0};
  const Action choke = make_action({0, 1}, {699.0, 699.0}, 3, params.prices);
  CHECK(instantaneous_regret(choke, params, f, 1.25) == doctest::Approx(1.25).epsilon(1e-12));
}

}  // TEST_SUITE
