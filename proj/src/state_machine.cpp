#include "crowdsync/state_machine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crowdsync/error.hpp"

namespace crowdsync {

void SwitchRule::validate() const {
  std::vector<std::string> problems;
  if (window < 1) problems.emplace_back("rule.window must be >= 1");
  if (!(saturation_scale > 0.0) || !std::isfinite(saturation_scale))
    problems.emplace_back("rule.saturation_scale must be finite and > 0");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

CouplingSummary aggregate_coupling(double a, std::span<const AgentParams> agents,
                                   std::span<const AgentState> states) {
  if (agents.empty()) throw Error("aggregate_coupling: empty population");
  if (agents.size() != states.size())
    throw Error("aggregate_coupling: " + std::to_string(agents.size()) + " agents but " +
                std::to_string(states.size()) + " states");

  CouplingSummary s;
  double sum_high = 0.0;
  double sum_low = 0.0;
  double sum_abs_low = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    s.b_total += states[i].effective_b;
    if (states[i].mode == AgentMode::Reactive) ++s.n_reactive;
    sum_high += agents[i].b_high;
    sum_low += agents[i].b_low;
    sum_abs_low += std::abs(agents[i].b_low);
  }
  const auto n = static_cast<double>(agents.size());
  s.n_normal = agents.size() - s.n_reactive;
  s.b_high_avg = sum_high / n;
  s.b_low_avg = sum_low / n;
  s.b_abs_low_avg = sum_abs_low / n;
  s.ab = a * s.b_total;
  s.ab_max = a * sum_high;
  s.ab_min = a * sum_low;
  return s;
}

CriticalPoint critical_reactive_count(double a, std::size_t n, double b_high_avg, double b_low_avg) {
  if (b_high_avg == b_low_avg)
    throw DegenerateError("critical_reactive_count: B_H equals B_L, the two states are indistinguishable");
  if (!(a > 0.0)) throw Error("critical_reactive_count: A must be > 0");
  const auto nd = static_cast<double>(n);
  const double value = (1.0 - a * nd * b_low_avg) / (a * (b_high_avg - b_low_avg));
  return {value, value <= nd};
}

std::size_t update_reactive_count(std::span<const double> history, const SwitchRule& rule,
                                  std::size_t n) {
  const std::size_t len = std::min(history.size(), rule.window);
  if (len == 0) return 0;
  const auto window = history.last(len);
  double sum_abs = 0.0;
  for (double x : window) sum_abs += std::abs(x);
  const double mean_abs = sum_abs / static_cast<double>(len);
  const double target = std::round(static_cast<double>(n) * mean_abs / rule.saturation_scale);
  if (!(target > 0.0)) return 0;  // also catches NaN
  if (target >= static_cast<double>(n)) return n;
  return static_cast<std::size_t>(target);
}

std::vector<std::size_t> switch_order(std::span<const AgentParams> agents) {
  std::vector<std::size_t> order(agents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return agents[l].b_high > agents[r].b_high;
  });
  return order;
}

std::vector<AgentState> assign_states(std::span<const AgentParams> agents, std::size_t n_reactive) {
  if (n_reactive > agents.size())
    throw Error("assign_states: n_reactive " + std::to_string(n_reactive) + " exceeds population " +
                std::to_string(agents.size()));
  std::vector<AgentState> states;
  states.reserve(agents.size());
  for (const auto& p : agents) states.push_back(AgentState::normal(p));
  const auto order = switch_order(agents);
  for (std::size_t k = 0; k < n_reactive; ++k) states[order[k]] = AgentState::reactive(agents[order[k]]);
  return states;
}

Stability classify_stability(double ab) noexcept {
  if (std::abs(ab - 1.0) <= 1e-9 || std::abs(ab + 1.0) <= 1e-9) return Stability::Marginal;
  if (std::abs(ab) < 1.0) return Stability::Contracting;
  return Stability::Amplifying;
}

std::string_view to_string(Stability s) noexcept {
  switch (s) {
    case Stability::Contracting: return "contracting";
    case Stability::Marginal: return "marginal";
    case Stability::Amplifying: return "amplifying";
  }
  return "unknown";
}

}  // namespace crowdsync
