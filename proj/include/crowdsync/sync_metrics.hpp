#pragma once

/// Synchronization, trend and volatility measures.
///
/// Two views of synchronization are provided: the instantaneous order
/// parameter R(t) = |sum dS_i| / sum |dS_i| and the windowed crowd
/// correlation rho_c, the mean correlation of each agent's action series
/// with the aggregate action. All statistics use population normalization
/// (divide by T).
///
/// 0/0 conventions: R and T_d are 0 for an all-zero input, and a pairwise
/// correlation involving a constant series is 0.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crowdsync/crowd_core.hpp"

namespace crowdsync {

double order_parameter(std::span<const double> dS_i) noexcept;

/// R as a function of the reactive fraction for dE = 0 and no noise:
/// [r (B_H - B_L) + B_L] / [r (B_H - B_0) + B_0], B_0 = mean |B_L|.
/// Throws DegenerateError if the denominator is not positive.
double order_parameter_closed_form(double ratio, double b_high_avg, double b_low_avg,
                                   double b_abs_low_avg);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean of R over `trials` draws of dS_i = B_i dO + eps_i, eps_i ~ U[-e, e].
/// round(ratio * n) agents couple with b_high_avg, the rest with 0. Trial k
/// of agent i uses Stream(seed, i, k), so estimates at different e share
/// their random numbers.
MonteCarloEstimate order_parameter_with_noise(double ratio, double b_high_avg, double dO, double e,
                                              std::size_t n, std::size_t trials, std::uint64_t seed);

double mean(std::span<const double> x) noexcept;
double population_sigma(std::span<const double> x) noexcept;

/// Population Pearson correlation. 0 if either series is constant.
/// Throws Error on length mismatch or fewer than two samples.
double pairwise_correlation(std::span<const double> x, std::span<const double> y);

/// N agents x T steps of action increments with cached sigma_i and rho_ij.
class DecisionPanel {
 public:
  /// `series` is agent-major: entry (i, t) lives at i * steps + t.
  DecisionPanel(std::vector<double> series, std::size_t agents, std::size_t steps);

  std::size_t agents() const noexcept { return agents_; }
  std::size_t steps() const noexcept { return steps_; }
  std::span<const double> series(std::size_t agent) const noexcept {
    return {series_.data() + agent * steps_, steps_};
  }
  std::span<const double> per_agent_sigma() const noexcept { return sigma_; }
  /// Row-major N x N correlation matrix.
  std::span<const double> corr() const noexcept { return corr_; }
  double corr(std::size_t i, std::size_t j) const noexcept { return corr_[i * agents_ + j]; }

  /// Aggregate dS(t) summed in ascending agent order.
  std::vector<double> aggregate_series() const;

 private:
  std::vector<double> series_;
  std::size_t agents_;
  std::size_t steps_;
  std::vector<double> sigma_;
  std::vector<double> corr_;
};

/// sqrt(sum sigma_l^2 + sum_{l>m} 2 rho_lm sigma_l sigma_m).
/// Throws Error if the quadratic form is materially negative.
double crowd_volatility(std::span<const double> sigma, std::span<const double> corr);

/// rho_c = (1 / (N sigma_c)) sum_i sum_j rho_ij sigma_j, with sigma_c from
/// crowd_volatility. Throws DegenerateError if every sigma_i is zero.
double crowd_correlation(const DecisionPanel& panel);

/// rho_c as the plain mean over agents of corr(dS_i, dS).
double crowd_correlation_direct(const DecisionPanel& panel);

double trendiness(std::span<const double> dO) noexcept;

inline double observed_volatility(double a, double sigma_c) noexcept { return a * sigma_c; }

/// sigma_O from the agent-level expansion A^2 (sum sigma^2 + cross terms).
double observed_volatility_expanded(double a, std::span<const double> sigma,
                                    std::span<const double> corr);

struct SyncReport {
  std::vector<double> r_instant;
  double rho_c = 0.0;  ///< NaN when undefined (no agent varies, or no panel)
  double sigma_c = 0.0;
  double sigma_o = 0.0;
  double t_d = 0.0;

  double mean_r() const noexcept;
};

/// Metrics over a contiguous block of step records. sigma_c and sigma_o are
/// measured as the spread of dS and dO respectively.
SyncReport sync_report(std::span<const StepRecord> records);

struct WindowReport {
  std::size_t start = 0;  ///< first step index, inclusive
  std::size_t end = 0;    ///< last step index, exclusive
  SyncReport report;
};

/// Non-overlapping windows by default (a trailing partial window is
/// dropped); `overlap` slides the window by one step.
std::vector<WindowReport> windowed_reports(std::span<const StepRecord> records, std::size_t window,
                                           bool overlap);

}  // namespace crowdsync
