#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "crowdsync/error.hpp"
#include "crowdsync/state_machine.hpp"
#include "oracles.hpp"

using namespace crowdsync;

namespace {

// Walk N_H over integers, find the bracket where A(N_H B_H + (N - N_H) B_L)
// crosses 1 and interpolate. The gain is linear in N_H so this is exact.
double swept_critical_count(double a, std::size_t n, double bh, double bl) {
  auto gain = [&](double k) { return a * (k * bh + (static_cast<double>(n) - k) * bl); };
  for (std::size_t k = 0; k < 10 * n; ++k) {
    const double g0 = gain(static_cast<double>(k)), g1 = gain(static_cast<double>(k + 1));
    if ((g0 - 1.0) * (g1 - 1.0) <= 0.0 && g0 != g1) return static_cast<double>(k) + (1.0 - g0) / (g1 - g0);
  }
  return NAN;
}

std::vector<AgentParams> random_agents(oracle::Gen& g, std::size_t n) {
  std::vector<AgentParams> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // coarse values so ties in b_high actually occur
    const double bh = 0.25 * static_cast<double>(g.count(1, 6));
    out[i] = {i, bh - 0.25 * static_cast<double>(g.count(1, 4)), bh, g.real(0.0, 2.0), 0.0};
  }
  return out;
}

}  // namespace

TEST_CASE("critical_reactive_count against a swept bracket") {
  const auto p1 = critical_reactive_count(0.01, 100, 1.0, 0.0);
  CHECK(p1.n_reactive == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(p1.reachable);

  const auto p2 = critical_reactive_count(0.0135, 100, 1.0, 0.0);
  CHECK(p2.n_reactive == doctest::Approx(swept_critical_count(0.0135, 100, 1.0, 0.0)).epsilon(1e-12));
  CHECK(p2.n_reactive == doctest::Approx(74.074074074074).epsilon(1e-10));
  CHECK(p2.reachable);

  const auto p3 = critical_reactive_count(0.005, 100, 1.0, 0.0);
  CHECK(p3.n_reactive == doctest::Approx(200.0));
  CHECK_FALSE(p3.reachable);

  oracle::Gen g(3);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = g.count(10, 1000);
    const double bl = g.real(-0.5, 0.5);
    const double bh = bl + g.real(0.1, 2.0);
    const double nhc = g.real(0.5, static_cast<double>(n) - 0.5);
    // choose A so the crossing falls inside [0, N]
    const double a = 1.0 / (nhc * bh + (static_cast<double>(n) - nhc) * bl);
    if (!(a > 0.0)) continue;
    const auto p = critical_reactive_count(a, n, bh, bl);
    CHECK(p.n_reactive == doctest::Approx(swept_critical_count(a, n, bh, bl)).epsilon(1e-9));
  }
}

TEST_CASE("critical_reactive_count is degenerate when B_H equals B_L") {
  CHECK_THROWS_AS(critical_reactive_count(0.01, 100, 0.5, 0.5), DegenerateError);
}

TEST_CASE("aggregate_coupling sums the effective couplings") {
  const auto agents = std::vector<AgentParams>{{0, -0.1, 1.0, 1, 0}, {1, 0.2, 0.6, 1, 0}, {2, -0.3, 2.0, 1, 0}};
  const std::vector<AgentState> states = {AgentState::reactive(agents[0]), AgentState::normal(agents[1]),
                                          AgentState::normal(agents[2])};
  const auto s = aggregate_coupling(0.5, agents, states);
  CHECK(s.n_reactive == 1);
  CHECK(s.n_normal == 2);
  CHECK(s.b_total == doctest::Approx(1.0 + 0.2 - 0.3));
  CHECK(s.ab == doctest::Approx(0.5 * 0.9));
  CHECK(s.b_high_avg == doctest::Approx(3.6 / 3));
  CHECK(s.b_low_avg == doctest::Approx(-0.2 / 3));
  CHECK(s.b_abs_low_avg == doctest::Approx(0.6 / 3));
  CHECK(s.ab_max == doctest::Approx(0.5 * 3 * 1.2));
  CHECK(s.ab_min == doctest::Approx(0.5 * 3 * (-0.2 / 3)));

  CHECK_THROWS_AS(aggregate_coupling(0.5, agents, std::vector<AgentState>(2)), Error);
}

TEST_CASE("two-state aggregation equals per-agent summation for every N_H") {
  const std::size_t n = 100;
  const double a = 0.01, bh = 1.25, bl = -0.125;
  std::vector<AgentParams> agents(n);
  for (std::size_t i = 0; i < n; ++i) agents[i] = {i, bl, bh, 1.0, 0.0};
  for (std::size_t nh = 0; nh <= n; ++nh) {
    const auto states = assign_states(agents, nh);
    double brute = 0.0;
    for (const auto& s : states) brute += s.effective_b;
    const auto sum = aggregate_coupling(a, agents, states);
    CHECK(sum.b_total == static_cast<double>(nh) * bh + static_cast<double>(n - nh) * bl);
    CHECK(sum.b_total == brute);
  }
}

TEST_CASE("update_reactive_count uses the trailing mean of |dO|") {
  const SwitchRule rule{3, 0.5};
  CHECK(update_reactive_count({}, rule, 100) == 0);
  const std::vector<double> h1 = {0.1};
  CHECK(update_reactive_count(h1, rule, 100) == 20);
  const std::vector<double> h2 = {10.0, 0.1, -0.2, 0.3};  // only the last three count
  CHECK(update_reactive_count(h2, rule, 100) == 40);
  const std::vector<double> h3 = {5.0};
  CHECK(update_reactive_count(h3, rule, 100) == 100);  // clamped
  const std::vector<double> h4 = {0.00124};
  CHECK(update_reactive_count(h4, rule, 100) == 0);  // rounds down
  const std::vector<double> h5 = {0.0025};
  CHECK(update_reactive_count(h5, rule, 100) == 1);  // half rounds away from zero
  const std::vector<double> h6 = {NAN};
  CHECK(update_reactive_count(h6, rule, 100) == 0);
}

TEST_CASE("property: update_reactive_count is bounded and monotone in activity") {
  oracle::Gen g(21);
  for (int k = 0; k < 500; ++k) {
    const SwitchRule rule{g.count(1, 10), g.real(0.01, 3.0)};
    const std::size_t n = g.count(1, 500);
    auto hist = g.reals(g.count(0, 30), -2.0, 2.0);
    const auto nh = update_reactive_count(hist, rule, n);
    CHECK(nh <= n);
    for (auto& x : hist) x *= 1.5;
    CHECK(update_reactive_count(hist, rule, n) >= nh);
  }
}

TEST_CASE("SwitchRule::validate") {
  CHECK_NOTHROW(SwitchRule{}.validate());
  CHECK_THROWS_AS((SwitchRule{0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SwitchRule{5, 0.0}.validate()), ValidationError);
}

TEST_CASE("assign_states matches a sort-based oracle") {
  oracle::Gen g(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = g.count(1, 60);
    const auto agents = random_agents(g, n);
    const std::size_t nh = g.count(0, n);

    std::vector<std::pair<double, std::size_t>> keyed;
    for (const auto& p : agents) keyed.emplace_back(-p.b_high, p.id);
    std::sort(keyed.begin(), keyed.end());
    std::vector<bool> reactive(n, false);
    for (std::size_t k = 0; k < nh; ++k) reactive[keyed[k].second] = true;

    const auto states = assign_states(agents, nh);
    REQUIRE(states.size() == n);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK((states[i].mode == AgentMode::Reactive) == reactive[i]);
      CHECK(states[i].effective_b == (reactive[i] ? agents[i].b_high : agents[i].b_low));
      count += states[i].mode == AgentMode::Reactive;
    }
    CHECK(count == nh);
  }
}

TEST_CASE("assign_states is nested as N_H grows") {
  oracle::Gen g(6);
  const auto agents = random_agents(g, 40);
  auto prev = assign_states(agents, 0);
  for (std::size_t nh = 1; nh <= 40; ++nh) {
    const auto cur = assign_states(agents, nh);
    for (std::size_t i = 0; i < 40; ++i)
      if (prev[i].mode == AgentMode::Reactive) CHECK(cur[i].mode == AgentMode::Reactive);
    prev = cur;
  }
  CHECK_THROWS(assign_states(agents, 41));
}

TEST_CASE("classify_stability") {
  CHECK(classify_stability(0.0) == Stability::Contracting);
  CHECK(classify_stability(0.999) == Stability::Contracting);
  CHECK(classify_stability(-0.5) == Stability::Contracting);
  CHECK(classify_stability(1.0) == Stability::Marginal);
  CHECK(classify_stability(1.0 + 1e-12) == Stability::Marginal);
  CHECK(classify_stability(-1.0) == Stability::Marginal);
  CHECK(classify_stability(1.0001) == Stability::Amplifying);
  CHECK(classify_stability(-1.5) == Stability::Amplifying);
  CHECK(to_string(Stability::Contracting) == "contracting");
  CHECK(to_string(Stability::Marginal) == "marginal");
  CHECK(to_string(Stability::Amplifying) == "amplifying");
}
