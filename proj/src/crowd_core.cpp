#include "crowdsync/crowd_core.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "crowdsync/error.hpp"

namespace crowdsync {

SingularityError::SingularityError(double ab)
    : Error("loop gain A*B = " + std::to_string(ab) + " is at the singular point 1"), ab_(ab) {}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out = "invalid configuration:";
  for (const auto& p : parts) out += "\n  - " + p;
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(join(problems)), problems_(std::move(problems)) {}

void CrowdConfig::validate() const {
  std::vector<std::string> problems;
  auto fail = [&](const std::string& msg) { problems.push_back(msg); };

  if (!(a > 0.0) || !std::isfinite(a)) fail("crowd.a must be finite and > 0 (A > 0)");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("crowd.dt must be finite and > 0");
  if (agents.empty()) fail("crowd.n must be >= 1");

  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& p = agents[i];
    const std::string who = "agent " + std::to_string(i);
    if (p.id != i) fail(who + ": id " + std::to_string(p.id) + " does not match its position");
    if (!std::isfinite(p.b_low) || !std::isfinite(p.b_high) || !std::isfinite(p.c) ||
        !std::isfinite(p.noise_amp)) {
      fail(who + ": coefficients must be finite");
      continue;
    }
    if (!(p.b_high > 0.0)) fail(who + ": b_high must be > 0 ({B_H} are always positive)");
    if (!(p.b_high > p.b_low)) fail(who + ": b_high must be > b_low ({B_H} greater than {B_L})");
    if (p.noise_amp < 0.0) fail(who + ": noise_amp must be >= 0");
  }

  if (const auto* w = std::get_if<WienerNoise>(&noise)) {
    if (!std::isfinite(w->mu)) fail("crowd.noise_mu must be finite");
    if (!(w->sigma >= 0.0) || !std::isfinite(w->sigma)) fail("crowd.noise_sigma must be finite and >= 0");
  }
  if (const auto* u = std::get_if<UniformNoise>(&noise)) {
    if (!(u->half_width >= 0.0) || !std::isfinite(u->half_width)) fail("crowd.noise_amp must be finite and >= 0");
  }

  if (!problems.empty()) throw ValidationError(std::move(problems));
}

CrowdConfig CrowdConfig::homogeneous(std::size_t n, double a, double b_low, double b_high, double c,
                                     NoiseModel noise) {
  CrowdConfig cfg;
  cfg.a = a;
  cfg.noise = noise;
  double amp = 0.0;
  if (const auto* u = std::get_if<UniformNoise>(&noise)) amp = u->half_width;
  cfg.agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cfg.agents.push_back({i, b_low, b_high, c, amp});
  return cfg;
}

double agent_step(const AgentParams& params, const AgentState& state, double dE, double dO_prev,
                  double noise) noexcept {
  return params.c * dE + state.effective_b * dO_prev + noise;
}

double aggregate(std::span<const double> dS_i) {
  if (dS_i.empty()) throw Error("aggregate: population must contain at least one agent");
  double sum = 0.0;
  for (double x : dS_i) sum += x;
  return sum;
}

double instantaneous_response(double a, double b_total, double c_total, double dE) {
  const double ab = a * b_total;
  if (std::abs(1.0 - ab) < 1e-9) throw SingularityError(ab);
  return (a * c_total / (1.0 - ab)) * dE;
}

double recurse_observation(double a, double b_total, double c_total, double dE, double dO) noexcept {
  const double ac = a * c_total;
  const double ab = a * b_total;
  return ac * dE + ab * dO;
}

double noise_increment(const NoiseModel& model, double dt, Stream& rng) noexcept {
  struct Visitor {
    double dt;
    Stream& rng;
    double operator()(const NoNoise&) const { return 0.0; }
    double operator()(const UniformNoise& u) const { return rng.uniform(-u.half_width, u.half_width); }
    double operator()(const WienerNoise& w) const {
      if (w.sigma == 0.0) return w.mu * dt;
      return w.mu * dt + w.sigma * std::sqrt(dt) * rng.normal();
    }
  };
  return std::visit(Visitor{dt, rng}, model);
}

double step_with_noise(double a, double b_total, double c_total, double dE, double dO,
                       double noise) noexcept {
  return recurse_observation(a, b_total, c_total, dE, dO) + noise;
}

}  // namespace crowdsync
