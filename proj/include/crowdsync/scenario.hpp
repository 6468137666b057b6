#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crowdsync/crowd_core.hpp"
#include "crowdsync/state_machine.hpp"
#include "crowdsync/sync_metrics.hpp"

namespace crowdsync {

// External force shapes. All emit increments dE(t), t in [0, T).

struct ZeroForce {
  bool operator==(const ZeroForce&) const = default;
};

/// E jumps by `height` at `onset` and stays there.
struct StepForce {
  double height = 1.0;
  std::size_t onset = 0;
  bool operator==(const StepForce&) const = default;
};

/// dE = slope on [start, end).
struct RampForce {
  double slope = 0.0;
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const RampForce&) const = default;
};

/// A story that builds up, peaks at `peak_step`, is invalidated by a sharp
/// negative run of `crash_steps`, whipsaws with alternating +/- confusion_amp
/// until `stabilize_step`, then goes quiet.
struct BubbleStory {
  double build_slope = 0.0;
  std::size_t peak_step = 0;
  double crash_slope = 0.0;
  std::size_t crash_steps = 0;  ///< 0 means "until stabilize_step"
  double confusion_amp = 0.0;
  std::size_t stabilize_step = 0;
  bool operator==(const BubbleStory&) const = default;
};

struct ExplicitForce {
  std::vector<double> series;
  bool operator==(const ExplicitForce&) const = default;
};

using ForceKind = std::variant<ZeroForce, StepForce, RampForce, BubbleStory, ExplicitForce>;

struct ForceProfile {
  ForceKind kind;
  std::vector<double> increments;

  std::size_t length() const noexcept { return increments.size(); }
};

/// Throws ValidationError when an onset/peak/stabilize index falls outside
/// [0, length) or the kind's own parameters are inconsistent.
ForceProfile build_profile(const ForceKind& kind, std::size_t length);

enum class SimulationPath { PerAgent, Aggregate };

struct RunOptions {
  SimulationPath path = SimulationPath::PerAgent;
  double ceiling = 1e12;            ///< |O| above this truncates the run
  std::size_t metric_window = 20;
  bool overlap = false;
  std::optional<std::size_t> pinned_reactive;  ///< bypass the switch rule
  double initial_dO = 0.0;
};

struct ScenarioResult {
  std::size_t n = 0;
  double a = 0.0;
  std::vector<StepRecord> records;
  std::vector<WindowReport> windows;
  std::vector<Stability> stability_trace;
  double peak_ratio = 0.0;
  double final_ratio = 0.0;
  bool diverged = false;
  std::optional<std::size_t> truncation_step;
};

/// Runs the feedback loop for profile.length() steps. Step t:
///   1. dE(t) from the profile
///   2. N_H from the dO window ending at t-1 (or the pinned count)
///   3. dS_i = C_i dE(t) + B_i dO(t-1) + eps_i, summed in id order
///   4. dO = A dS, O += dO
/// A diverged run keeps every record up to and including the step whose |O|
/// crossed the ceiling (or went non-finite).
ScenarioResult run(const CrowdConfig& config, const SwitchRule& rule, const ForceProfile& profile,
                   std::uint64_t seed, const RunOptions& options = {});

struct RunSummary {
  bool diverged = false;
  std::optional<std::size_t> truncation_step;
  std::size_t steps_run = 0;
  double peak_ratio = 0.0;
  double final_ratio = 0.0;
  double peak_O = 0.0;
  double final_O = 0.0;
  SyncReport whole_run;
};

RunSummary summarize(const ScenarioResult& result);

enum class SweepParam { A, BHigh, BLow, N, NoiseAmp, SaturationScale };

/// Accepts a, b_high, b_low, n, noise_amp, saturation_scale; anything else
/// throws Error naming the valid choices.
SweepParam parse_sweep_param(std::string_view name);
std::string_view to_string(SweepParam p) noexcept;

enum class SeedPolicy { Fixed, PerValue };

struct SweepEntry {
  double value = 0.0;
  std::uint64_t seed = 0;
  RunSummary summary;
};

/// One independent run per value, returned in input order. `jobs` > 1 runs
/// values concurrently; every run owns its configuration and noise streams.
std::vector<SweepEntry> sweep(const CrowdConfig& base, const SwitchRule& rule, SweepParam param,
                              std::span<const double> values, const ForceProfile& profile,
                              std::uint64_t seed, SeedPolicy policy, const RunOptions& options = {},
                              std::size_t jobs = 1);

/// Pins N_H = round(ratio N), drives a single step with dE = 0 and the given
/// dO, and averages R over trials. eps_i ~ U[-noise_amp, noise_amp] from
/// Stream(seed, i, trial).
MonteCarloEstimate forced_ratio_run(const CrowdConfig& config, double ratio, double dO_drive,
                                    double noise_amp, std::size_t trials, std::uint64_t seed);

}  // namespace crowdsync
