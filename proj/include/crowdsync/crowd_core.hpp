#pragma once

/// Feedback dynamics of a self-organized crowd.
///
/// Each agent i reacts to the change of an external force E and to the
/// change of a shared observation O:
///
///     dS_i = C_i dE + B_i dO + eps_i
///     dS   = sum_i dS_i
///     dO   = A dS
///
/// With a one-step delay this collapses to the AR(1)-like recursion
///
///     dO(t+1) = A C dE(t) + A B dO(t) + noise
///
/// whose loop gain A*B decides whether the crowd contracts (|AB| < 1) or
/// amplifies itself (AB > 1).

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "crowdsync/rng.hpp"

namespace crowdsync {

struct AgentParams {
  std::size_t id = 0;
  double b_low = 0.0;      ///< coupling to dO in the normal state
  double b_high = 0.0;     ///< coupling to dO in the reactive state
  double c = 0.0;          ///< sensitivity to dE
  double noise_amp = 0.0;  ///< half-width of the uniform per-agent noise

  bool operator==(const AgentParams&) const = default;
};

enum class AgentMode { Normal, Reactive };

struct AgentState {
  AgentMode mode = AgentMode::Normal;
  double effective_b = 0.0;

  static AgentState normal(const AgentParams& p) noexcept { return {AgentMode::Normal, p.b_low}; }
  static AgentState reactive(const AgentParams& p) noexcept { return {AgentMode::Reactive, p.b_high}; }

  bool operator==(const AgentState&) const = default;
};

struct NoNoise {
  bool operator==(const NoNoise&) const = default;
};

/// Per-agent eps_i ~ U[-e, +e]; e is taken from each agent's noise_amp.
struct UniformNoise {
  double half_width = 0.0;
  bool operator==(const UniformNoise&) const = default;
};

/// Aggregate A*eps = mu dt + sigma dZ.
struct WienerNoise {
  double mu = 0.0;
  double sigma = 0.0;
  bool operator==(const WienerNoise&) const = default;
};

using NoiseModel = std::variant<NoNoise, UniformNoise, WienerNoise>;

struct CrowdConfig {
  double a = 1.0;
  std::vector<AgentParams> agents;
  NoiseModel noise = NoNoise{};
  double dt = 1.0;

  std::size_t n() const noexcept { return agents.size(); }

  /// Throws ValidationError listing every violated invariant.
  void validate() const;

  /// N identical agents; noise_amp is copied from a UniformNoise model.
  static CrowdConfig homogeneous(std::size_t n, double a, double b_low, double b_high, double c,
                                 NoiseModel noise = NoNoise{});
};

struct StepRecord {
  std::size_t t = 0;
  double dE = 0.0;
  double E = 0.0;
  std::vector<double> dS_i;  // empty on the aggregate path
  double dS = 0.0;
  double S = 0.0;
  double dO = 0.0;
  double O = 0.0;
  std::size_t n_reactive = 0;
  double b_total = 0.0;
  double ab = 0.0;
  double R = 0.0;  // NaN on the aggregate path
};

/// C_i dE + B_i dO_prev + noise, with B_i the state's effective coupling.
double agent_step(const AgentParams& params, const AgentState& state, double dE, double dO_prev,
                  double noise) noexcept;

/// Sum in ascending index order. Throws Error on an empty population.
double aggregate(std::span<const double> dS_i);

inline double observe(double a, double dS) noexcept { return a * dS; }

/// Zero-delay response A C dE / (1 - A B).
/// Throws SingularityError when |1 - A B| < 1e-9.
double instantaneous_response(double a, double b_total, double c_total, double dE);

/// One delayed step: A C dE(t) + A B dO(t).
double recurse_observation(double a, double b_total, double c_total, double dE, double dO) noexcept;

/// One draw from `model`. For UniformNoise this is a single agent's eps_i on
/// [-half_width, +half_width); for WienerNoise it is the aggregate A*eps;
/// NoNoise yields 0 without touching the stream.
double noise_increment(const NoiseModel& model, double dt, Stream& rng) noexcept;

/// recurse_observation plus an already-sampled aggregate noise term.
double step_with_noise(double a, double b_total, double c_total, double dE, double dO,
                       double noise) noexcept;

}  // namespace crowdsync
