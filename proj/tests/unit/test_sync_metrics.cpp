#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "crowdsync/error.hpp"
#include "crowdsync/rng.hpp"
#include "crowdsync/sync_metrics.hpp"
#include "oracles.hpp"

using namespace crowdsync;

namespace {

DecisionPanel random_panel(oracle::Gen& g, std::size_t n, std::size_t t) {
  // mix of a common factor and idiosyncratic parts so correlations spread out
  const auto common = g.reals(t, -1.0, 1.0);
  std::vector<double> series(n * t);
  for (std::size_t i = 0; i < n; ++i) {
    const double load = g.real(-1.0, 1.0);
    const double scale = g.real(0.1, 5.0);
    for (std::size_t k = 0; k < t; ++k) series[i * t + k] = scale * (load * common[k] + g.real(-1.0, 1.0));
  }
  return DecisionPanel(std::move(series), n, t);
}

}  // namespace

TEST_CASE("order_parameter examples") {
  CHECK(order_parameter(std::vector<double>{1, 2, 3}) == 1.0);
  CHECK(order_parameter(std::vector<double>{1, -1}) == 0.0);
  CHECK(order_parameter(std::vector<double>{3, -1}) == doctest::Approx(0.5));
  CHECK(order_parameter(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(order_parameter(std::vector<double>{}) == 0.0);
}

TEST_CASE("property: order_parameter is bounded, scale and permutation invariant") {
  oracle::Gen g(1);
  for (int k = 0; k < 1000; ++k) {
    auto ds = g.reals(g.count(1, 200), -3.0, 3.0 + g.real(0.0, 3.0));
    const double r = order_parameter(ds);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(r == doctest::Approx(oracle::order_parameter(ds)).epsilon(1e-12));

    const double s = g.real(0.01, 100.0) * (g.coin() ? 1.0 : -1.0);
    auto scaled = ds;
    for (auto& x : scaled) x *= s;
    CHECK(order_parameter(scaled) == doctest::Approx(r).epsilon(1e-12));

    std::shuffle(ds.begin(), ds.end(), g.engine());
    CHECK(order_parameter(ds) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("closed-form order parameter against a random-sign Monte-Carlo crowd") {
  const double closed = order_parameter_closed_form(0.5, 1.0, 0.0, 0.2);
  CHECK(closed == doctest::Approx(5.0 / 6.0));

  // Half the crowd reactive with b = 1, the rest with b = +-0.2 by coin flip.
  std::mt19937_64 eng(2024);
  std::bernoulli_distribution coin(0.5);
  const std::size_t n = 10000;
  double mc = 0.0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> ds(n);
    for (std::size_t i = 0; i < n; ++i) ds[i] = i < n / 2 ? 1.0 : (coin(eng) ? 0.2 : -0.2);
    mc += oracle::order_parameter(ds);
  }
  mc /= reps;
  CHECK(std::abs(mc - closed) / closed < 0.02);

  CHECK(order_parameter_closed_form(1.0, 1.0, -0.3, 0.3) == 1.0);
  CHECK(order_parameter_closed_form(0.0, 1.0, 0.1, 0.1) == 1.0);
  CHECK_THROWS_AS(order_parameter_closed_form(0.0, 1.0, 0.0, 0.0), DegenerateError);
}

TEST_CASE("property: closed form is monotone in the reactive ratio") {
  oracle::Gen g(2);
  for (int k = 0; k < 200; ++k) {
    const double b0 = g.real(0.01, 1.0);
    const double bl = g.real(-b0, b0);
    const double bh = g.real(b0, 3.0);
    double prev = -1.0;
    for (int j = 0; j <= 20; ++j) {
      const double r = order_parameter_closed_form(j / 20.0, bh, bl, b0);
      CHECK(r >= prev - 1e-12);
      CHECK(r <= 1.0 + 1e-12);
      prev = r;
    }
  }
}

TEST_CASE("order_parameter_with_noise") {
  const auto clean = order_parameter_with_noise(1.0, 1.0, 1.0, 0.0, 100, 10, 1);
  CHECK(clean.mean == 1.0);
  CHECK(clean.std_error == 0.0);

  const auto noisy = order_parameter_with_noise(1.0, 1.0, 1.0, 5.0, 1000, 200, 1);
  CHECK(noisy.mean < 0.5);
  CHECK(noisy.mean > 0.0);
  CHECK(noisy.std_error > 0.0);
  // deterministic in the seed
  const auto again = order_parameter_with_noise(1.0, 1.0, 1.0, 5.0, 1000, 200, 1);
  CHECK(again.mean == noisy.mean);
  CHECK_THROWS(order_parameter_with_noise(1.0, 1.0, 1.0, 5.0, 0, 10, 1));
}

TEST_CASE("mean and population sigma") {
  const std::vector<double> x = {1, 2, 3, 4};
  CHECK(mean(x) == 2.5);
  CHECK(population_sigma(x) == doctest::Approx(std::sqrt(1.25)));
  CHECK(population_sigma(std::vector<double>{7, 7, 7}) == 0.0);
}

TEST_CASE("pairwise_correlation against the textbook formula") {
  oracle::Gen g(3);
  for (int k = 0; k < 300; ++k) {
    const std::size_t t = g.count(2, 300);
    const auto x = g.reals(t, -1, 1);
    auto y = g.reals(t, -1, 1);
    const double w = g.real(-1, 1);
    for (std::size_t j = 0; j < t; ++j) y[j] += w * x[j];
    const double r = pairwise_correlation(x, y);
    CHECK(r == doctest::Approx(oracle::correlation(x, y)).epsilon(1e-9));
    CHECK(std::abs(r) <= 1.0);
    CHECK(pairwise_correlation(y, x) == r);
  }
  const std::vector<double> a = {1, 2, 3}, b = {2, 4, 6}, c = {5, 5, 5};
  CHECK(pairwise_correlation(a, b) == doctest::Approx(1.0));
  CHECK(pairwise_correlation(a, c) == 0.0);
  CHECK_THROWS(pairwise_correlation(a, std::vector<double>{1, 2}));
  CHECK_THROWS(pairwise_correlation(std::vector<double>{1}, std::vector<double>{1}));
}

TEST_CASE("DecisionPanel caches sigma and correlations") {
  std::vector<double> s = {1, 2, 3, 4,  /**/ 4, 3, 2, 1,  /**/ 9, 9, 9, 9};
  const DecisionPanel p(s, 3, 4);
  CHECK(p.per_agent_sigma()[0] == doctest::Approx(std::sqrt(1.25)));
  CHECK(p.per_agent_sigma()[2] == 0.0);
  CHECK(p.corr(0, 0) == 1.0);
  CHECK(p.corr(0, 1) == doctest::Approx(-1.0));
  CHECK(p.corr(2, 2) == 0.0);
  CHECK(p.corr(0, 2) == 0.0);
  const auto agg = p.aggregate_series();
  CHECK(agg == std::vector<double>{14, 14, 14, 14});
  CHECK_THROWS(DecisionPanel(s, 3, 5));
  CHECK_THROWS(DecisionPanel(std::vector<double>{1, 2}, 2, 1));
}

TEST_CASE("crowd_volatility equals the sigma of the aggregate series") {
  oracle::Gen g(4);
  for (int k = 0; k < 50; ++k) {
    const auto p = random_panel(g, g.count(1, 30), g.count(2, 200));
    const double want = oracle::stddev(p.aggregate_series());
    CHECK(crowd_volatility(p.per_agent_sigma(), p.corr()) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("observed volatility: direct product equals the expanded sum") {
  oracle::Gen g(5);
  for (int k = 0; k < 50; ++k) {
    const auto p = random_panel(g, g.count(1, 30), g.count(2, 200));
    const double a = g.real(0.001, 2.0);
    const double sc = crowd_volatility(p.per_agent_sigma(), p.corr());
    CHECK(observed_volatility_expanded(a, p.per_agent_sigma(), p.corr()) ==
          doctest::Approx(observed_volatility(a, sc)).epsilon(1e-9));
  }
}

TEST_CASE("property: weighted and direct crowd correlation agree") {
  oracle::Gen g(6);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_panel(g, g.count(1, 50), g.count(2, 1000));
    const double w = crowd_correlation(p);
    const double d = crowd_correlation_direct(p);
    CHECK(w == doctest::Approx(d).epsilon(1e-9));
    CHECK(w >= -1.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("crowd correlation extremes") {
  // perfectly correlated crowd: rho_c = 1 and sigma_c is the plain sum
  oracle::Gen g(7);
  const auto base = g.reals(100, -1, 1);
  std::vector<double> s;
  double sigma_sum = 0.0;
  for (double scale : {0.5, 1.0, 2.0, 3.5}) {
    for (double x : base) s.push_back(scale * x);
    sigma_sum += scale * oracle::stddev(base);
  }
  const DecisionPanel locked(s, 4, 100);
  CHECK(crowd_correlation(locked) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(crowd_volatility(locked.per_agent_sigma(), locked.corr()) == doctest::Approx(sigma_sum).epsilon(1e-12));

  // two independent agents with equal volatility: each correlates 1/sqrt(2)
  Stream r0(99, 0, 0), r1(99, 1, 0);
  const std::size_t t = 200000;
  std::vector<double> two(2 * t);
  for (std::size_t k = 0; k < t; ++k) {
    two[k] = r0.uniform(-1, 1);
    two[t + k] = r1.uniform(-1, 1);
  }
  const DecisionPanel indep(two, 2, t);
  CHECK(std::abs(crowd_correlation(indep) - 1.0 / std::sqrt(2.0)) < 0.01 / std::sqrt(2.0));

  const DecisionPanel flat(std::vector<double>(20, 3.0), 2, 10);
  CHECK_THROWS_AS(crowd_correlation(flat), DegenerateError);
  CHECK_THROWS_AS(crowd_correlation_direct(flat), DegenerateError);
}

TEST_CASE("property: crowd correlation is invariant to agent order and positive scaling") {
  oracle::Gen g(8);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = g.count(2, 20), t = g.count(5, 200);
    const auto p = random_panel(g, n, t);
    const double base = crowd_correlation(p);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), g.engine());
    const double scale = g.real(0.1, 10.0);
    std::vector<double> moved(n * t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < t; ++j) moved[i * t + j] = scale * p.series(perm[i])[j];
    CHECK(crowd_correlation(DecisionPanel(moved, n, t)) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("trendiness") {
  CHECK(trendiness(std::vector<double>{1, 2, 0.5, 3}) == 1.0);
  CHECK(trendiness(std::vector<double>{-1, -2}) == 1.0);
  CHECK(trendiness(std::vector<double>{1, -1, 2, -2}) == 0.0);
  CHECK(trendiness(std::vector<double>{0, 0}) == 0.0);
  CHECK(trendiness(std::vector<double>{3, -1}) == doctest::Approx(0.5));
  oracle::Gen g(9);
  for (int k = 0; k < 2000; ++k) {
    const auto w = g.reals(g.count(1, 50), -1, 1);
    const double td = trendiness(w);
    CHECK(td >= 0.0);
    CHECK(td <= 1.0);
  }
}

TEST_CASE("sync_report and windowed_reports") {
  std::vector<StepRecord> recs(25);
  for (std::size_t t = 0; t < recs.size(); ++t) {
    auto& r = recs[t];
    r.t = t;
    r.dS_i = {static_cast<double>(t % 3), static_cast<double>(t % 3) + 1.0, -0.5};
    r.dS = r.dS_i[0] + r.dS_i[1] + r.dS_i[2];
    r.dO = 0.1 * r.dS;
    r.R = order_parameter(r.dS_i);
  }
  const auto rep = sync_report(recs);
  CHECK(rep.r_instant.size() == 25);
  CHECK(rep.t_d == 1.0);
  std::vector<double> ds, dO;
  for (const auto& r : recs) {
    ds.push_back(r.dS);
    dO.push_back(r.dO);
  }
  CHECK(rep.sigma_c == doctest::Approx(oracle::stddev(ds)));
  CHECK(rep.sigma_o == doctest::Approx(oracle::stddev(dO)));
  CHECK(rep.sigma_o == doctest::Approx(0.1 * rep.sigma_c));
  CHECK(std::isfinite(rep.rho_c));

  const auto w = windowed_reports(recs, 10, false);
  REQUIRE(w.size() == 2);  // trailing partial window dropped
  CHECK(w[0].start == 0);
  CHECK(w[0].end == 10);
  CHECK(w[1].start == 10);
  CHECK(w[1].end == 20);
  const auto slide = windowed_reports(recs, 10, true);
  CHECK(slide.size() == 16);
  CHECK(slide[3].start == 3);
  CHECK(windowed_reports(recs, 30, false).empty());
  CHECK_THROWS(windowed_reports(recs, 0, false));

  // without a per-agent panel rho_c is undefined
  for (auto& r : recs) r.dS_i.clear();
  CHECK(std::isnan(sync_report(recs).rho_c));
}
