#pragma once

/// Flat key-value scenario files.
///
///     # comment
///     name = fig4-stable
///     crowd.n = 100
///     crowd.b_high = 0.5          # one value for every agent ...
///     crowd.c = 1, 1, 0.5, ...    # ... or exactly n values
///     rule.saturation_scale = 0.54
///     profile.kind = step
///     run.steps = 60
///
/// The full key list with types, units and defaults is in
/// docs/scenario-format.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsync/crowd_core.hpp"
#include "crowdsync/scenario.hpp"
#include "crowdsync/state_machine.hpp"

namespace crowdsync {

/// How a single crowd.b_low value expands to the population.
enum class LowSign {
  Fixed,        ///< every agent gets b_low
  Alternating,  ///< agent i gets +|b_low| for even i, -|b_low| for odd i
};

enum class NoiseKind { None, Uniform, Wiener };

struct ScenarioFile {
  std::string name = "scenario";

  std::size_t n = 0;
  double a = 0.0;
  std::vector<double> b_low;
  std::vector<double> b_high;
  std::vector<double> c;
  LowSign b_low_sign = LowSign::Fixed;
  NoiseKind noise = NoiseKind::None;
  double noise_amp = 0.0;
  double noise_mu = 0.0;
  double noise_sigma = 0.0;
  double dt = 1.0;

  SwitchRule rule;
  ForceKind profile = ZeroForce{};

  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::size_t metric_window = 20;
  bool overlap = false;
  double ceiling = 1e12;
  SimulationPath path = SimulationPath::PerAgent;
  double initial_dO = 0.0;

  bool operator==(const ScenarioFile&) const = default;

  CrowdConfig crowd() const;
  ForceProfile force() const;
  RunOptions options() const;
};

/// Parses and validates. On failure throws ValidationError carrying every
/// problem found, each prefixed with its line number where one applies.
ScenarioFile parse_scenario(std::string_view text);

ScenarioFile load_scenario(const std::filesystem::path& path);

/// Canonical text: fixed key order, defaults spelled out, shortest
/// round-trip number formatting. parse_scenario(to_text(f)) == f.
std::string to_text(const ScenarioFile& file);

}  // namespace crowdsync
