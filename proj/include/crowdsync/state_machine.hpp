#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "crowdsync/crowd_core.hpp"

namespace crowdsync {

/// N_H proportional to the trailing mean of |dO|, saturating at N.
struct SwitchRule {
  std::size_t window = 5;
  double saturation_scale = 1.0;  ///< mean |dO| at which every agent is reactive

  void validate() const;
  bool operator==(const SwitchRule&) const = default;
};

struct CouplingSummary {
  std::size_t n_reactive = 0;
  std::size_t n_normal = 0;
  double b_total = 0.0;
  double b_high_avg = 0.0;
  double b_low_avg = 0.0;
  double b_abs_low_avg = 0.0;
  double ab = 0.0;
  double ab_max = 0.0;  ///< A N B_H
  double ab_min = 0.0;  ///< A N B_L
};

/// Exact per-agent sum of effective couplings plus population averages.
CouplingSummary aggregate_coupling(double a, std::span<const AgentParams> agents,
                                   std::span<const AgentState> states);

struct CriticalPoint {
  double n_reactive = 0.0;  ///< real-valued N_HC
  bool reachable = true;    ///< false when N_HC > N, i.e. A N B_H < 1
};

/// Reactive count at which A*B crosses 1:
/// N_HC = (1 - A N B_L) / (A (B_H - B_L)).
CriticalPoint critical_reactive_count(double a, std::size_t n, double b_high_avg, double b_low_avg);

/// round(n * mean|dO| / saturation_scale) clamped to [0, n]. Only the last
/// rule.window entries of `history` are used; a shorter history uses what
/// is there, and an empty one gives 0.
std::size_t update_reactive_count(std::span<const double> history, const SwitchRule& rule,
                                  std::size_t n);

/// Order in which agents turn reactive: largest b_high first, ties by id.
std::vector<std::size_t> switch_order(std::span<const AgentParams> agents);

/// Exactly n_reactive agents reactive, chosen by switch_order.
std::vector<AgentState> assign_states(std::span<const AgentParams> agents, std::size_t n_reactive);

enum class Stability { Contracting, Marginal, Amplifying };

/// |ab - 1| <= 1e-9 or |ab + 1| <= 1e-9 is Marginal; otherwise |ab| < 1
/// contracts and anything larger (including oscillatory ab < -1) amplifies.
Stability classify_stability(double ab) noexcept;

std::string_view to_string(Stability s) noexcept;

}  // namespace crowdsync
