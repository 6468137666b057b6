#include "crowdsync/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "crowdsync/error.hpp"
#include "crowdsync/rng.hpp"

namespace crowdsync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream lane for crowd-level (Wiener) noise; agent lanes are their ids.
constexpr std::uint64_t kCrowdLane = 0xC0FFEE0000000000ULL;

struct ProfileBuilder {
  std::size_t length;
  std::vector<std::string>& problems;

  void check_index(const char* key, std::size_t idx) const {
    if (idx >= length)
      problems.push_back(std::string("profile.") + key + " = " + std::to_string(idx) +
                         " is outside [0, " + std::to_string(length) + ")");
  }

  std::vector<double> operator()(const ZeroForce&) const { return std::vector<double>(length, 0.0); }

  std::vector<double> operator()(const StepForce& s) const {
    check_index("onset", s.onset);
    if (!std::isfinite(s.height)) problems.emplace_back("profile.height must be finite");
    std::vector<double> out(length, 0.0);
    if (s.onset < length) out[s.onset] = s.height;
    return out;
  }

  std::vector<double> operator()(const RampForce& r) const {
    check_index("start", r.start);
    if (r.end > length || r.end < r.start)
      problems.push_back("profile.end = " + std::to_string(r.end) + " must lie in [start, " +
                         std::to_string(length) + "]");
    if (!std::isfinite(r.slope)) problems.emplace_back("profile.slope must be finite");
    std::vector<double> out(length, 0.0);
    for (std::size_t t = r.start; t < std::min(r.end, length); ++t) out[t] = r.slope;
    return out;
  }

  std::vector<double> operator()(const BubbleStory& b) const {
    check_index("peak_step", b.peak_step);
    check_index("stabilize_step", b.stabilize_step);
    if (b.peak_step == 0) problems.emplace_back("profile.peak_step must be >= 1 so the story can build");
    if (b.stabilize_step <= b.peak_step) problems.emplace_back("profile.stabilize_step must exceed profile.peak_step");
    if (!(b.build_slope > 0.0)) problems.emplace_back("profile.build_slope must be > 0");
    if (!(b.crash_slope < 0.0)) problems.emplace_back("profile.crash_slope must be < 0");
    if (!(b.confusion_amp >= 0.0) || !std::isfinite(b.confusion_amp))
      problems.emplace_back("profile.confusion_amp must be finite and >= 0");
    const std::size_t crash_end =
        b.crash_steps == 0 ? b.stabilize_step : b.peak_step + b.crash_steps;
    if (crash_end > b.stabilize_step)
      problems.emplace_back("profile.peak_step + profile.crash_steps must not exceed profile.stabilize_step");

    std::vector<double> out(length, 0.0);
    if (!problems.empty()) return out;
    for (std::size_t t = 0; t < b.peak_step; ++t) out[t] = b.build_slope;
    for (std::size_t t = b.peak_step; t < crash_end; ++t) out[t] = b.crash_slope;
    for (std::size_t t = crash_end; t < b.stabilize_step; ++t)
      out[t] = (t - crash_end) % 2 == 0 ? b.confusion_amp : -b.confusion_amp;
    return out;
  }

  std::vector<double> operator()(const ExplicitForce& e) const {
    if (e.series.size() != length)
      problems.push_back("profile.series has " + std::to_string(e.series.size()) + " entries but run.steps is " +
                         std::to_string(length));
    if (!std::all_of(e.series.begin(), e.series.end(), [](double x) { return std::isfinite(x); }))
      problems.emplace_back("profile.series entries must be finite");
    return e.series;
  }
};

std::vector<AgentState> states_for(std::span<const AgentParams> agents, std::span<const std::size_t> order,
                                   std::size_t n_reactive) {
  std::vector<AgentState> states;
  states.reserve(agents.size());
  for (const auto& p : agents) states.push_back(AgentState::normal(p));
  for (std::size_t k = 0; k < n_reactive; ++k) states[order[k]] = AgentState::reactive(agents[order[k]]);
  return states;
}

}  // namespace

ForceProfile build_profile(const ForceKind& kind, std::size_t length) {
  std::vector<std::string> problems;
  if (length == 0) throw ValidationError({"run.steps must be >= 1"});
  auto increments = std::visit(ProfileBuilder{length, problems}, kind);
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return {kind, std::move(increments)};
}

ScenarioResult run(const CrowdConfig& config, const SwitchRule& rule, const ForceProfile& profile,
                   std::uint64_t seed, const RunOptions& options) {
  config.validate();
  if (!options.pinned_reactive) rule.validate();
  if (options.pinned_reactive && *options.pinned_reactive > config.n())
    throw ValidationError({"pinned reactive count exceeds the population"});
  if (!(options.ceiling > 0.0)) throw ValidationError({"run.ceiling must be > 0"});

  const auto& agents = config.agents;
  const std::size_t n = config.n();
  const double a = config.a;
  const auto order = switch_order(agents);
  double c_total = 0.0;
  for (const auto& p : agents) c_total += p.c;

  ScenarioResult result;
  result.n = n;
  result.a = a;
  result.records.reserve(profile.length());

  std::vector<double> history;  // dO of completed steps
  history.reserve(profile.length());
  double dO_prev = options.initial_dO;
  double E = 0.0, S = 0.0, O = 0.0;

  const bool uniform = std::holds_alternative<UniformNoise>(config.noise);
  const auto* wiener = std::get_if<WienerNoise>(&config.noise);

  for (std::size_t t = 0; t < profile.length(); ++t) {
    StepRecord rec;
    rec.t = t;
    rec.dE = profile.increments[t];
    E += rec.dE;
    rec.E = E;

    rec.n_reactive = options.pinned_reactive ? *options.pinned_reactive
                                             : update_reactive_count(history, rule, n);
    const auto states = states_for(agents, order, rec.n_reactive);
    const auto coupling = aggregate_coupling(a, agents, states);
    rec.b_total = coupling.b_total;
    rec.ab = coupling.ab;

    double crowd_noise = 0.0;  // aggregate A*eps from the Wiener model
    if (wiener) {
      Stream rng(seed, kCrowdLane, t);
      crowd_noise = noise_increment(*wiener, config.dt, rng);
    }

    if (options.path == SimulationPath::PerAgent) {
      rec.dS_i.resize(n);
      const double shared_eps = wiener ? crowd_noise / (a * static_cast<double>(n)) : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double eps = shared_eps;
        if (uniform) {
          Stream rng(seed, i, t);
          eps = noise_increment(UniformNoise{agents[i].noise_amp}, config.dt, rng);
        }
        rec.dS_i[i] = agent_step(agents[i], states[i], rec.dE, dO_prev, eps);
      }
      rec.dS = aggregate(rec.dS_i);
      rec.dO = observe(a, rec.dS);
      rec.R = order_parameter(rec.dS_i);
    } else {
      double eps_sum = wiener ? crowd_noise / a : 0.0;
      if (uniform) {
        eps_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          Stream rng(seed, i, t);
          eps_sum += noise_increment(UniformNoise{agents[i].noise_amp}, config.dt, rng);
        }
      }
      const double a_eps = wiener ? crowd_noise : a * eps_sum;
      rec.dS = c_total * rec.dE + coupling.b_total * dO_prev + eps_sum;
      rec.dO = step_with_noise(a, coupling.b_total, c_total, rec.dE, dO_prev, a_eps);
      rec.R = kNaN;
    }

    S += rec.dS;
    O += rec.dO;
    rec.S = S;
    rec.O = O;
    history.push_back(rec.dO);
    dO_prev = rec.dO;

    result.stability_trace.push_back(classify_stability(rec.ab));
    result.records.push_back(std::move(rec));

    if (!std::isfinite(O) || std::abs(O) > options.ceiling) {
      result.diverged = true;
      result.truncation_step = t;
      break;
    }
  }

  std::size_t peak = 0;
  for (const auto& r : result.records) peak = std::max(peak, r.n_reactive);
  result.peak_ratio = static_cast<double>(peak) / static_cast<double>(n);
  result.final_ratio = result.records.empty()
                           ? 0.0
                           : static_cast<double>(result.records.back().n_reactive) / static_cast<double>(n);
  result.windows = windowed_reports(result.records, options.metric_window, options.overlap);
  return result;
}

RunSummary summarize(const ScenarioResult& result) {
  RunSummary s;
  s.diverged = result.diverged;
  s.truncation_step = result.truncation_step;
  s.steps_run = result.records.size();
  s.peak_ratio = result.peak_ratio;
  s.final_ratio = result.final_ratio;
  if (!result.records.empty()) {
    s.peak_O = result.records.front().O;
    for (const auto& r : result.records) s.peak_O = std::max(s.peak_O, r.O);
    s.final_O = result.records.back().O;
  }
  s.whole_run = sync_report(result.records);
  return s;
}

namespace {

constexpr std::pair<std::string_view, SweepParam> kSweepParams[] = {
    {"a", SweepParam::A},
    {"b_high", SweepParam::BHigh},
    {"b_low", SweepParam::BLow},
    {"n", SweepParam::N},
    {"noise_amp", SweepParam::NoiseAmp},
    {"saturation_scale", SweepParam::SaturationScale},
};

void apply(SweepParam p, double v, CrowdConfig& cfg, SwitchRule& rule) {
  switch (p) {
    case SweepParam::A:
      cfg.a = v;
      break;
    case SweepParam::BHigh:
      for (auto& ag : cfg.agents) ag.b_high = v;
      break;
    case SweepParam::BLow:
      for (auto& ag : cfg.agents) ag.b_low = v;
      break;
    case SweepParam::N: {
      if (!(v >= 1.0) || v != std::floor(v) || v > 1e8)
        throw Error("sweep: n must be a positive integer, got " + std::to_string(v));
      const auto base = cfg.agents;
      const auto n = static_cast<std::size_t>(v);
      cfg.agents.clear();
      for (std::size_t i = 0; i < n; ++i) {
        auto ag = base[i % base.size()];
        ag.id = i;
        cfg.agents.push_back(ag);
      }
      break;
    }
    case SweepParam::NoiseAmp:
      if (std::holds_alternative<WienerNoise>(cfg.noise))
        throw Error("sweep: noise_amp applies to uniform noise, but the crowd uses Wiener noise");
      cfg.noise = UniformNoise{v};
      for (auto& ag : cfg.agents) ag.noise_amp = v;
      break;
    case SweepParam::SaturationScale:
      rule.saturation_scale = v;
      break;
  }
}

}  // namespace

SweepParam parse_sweep_param(std::string_view name) {
  for (const auto& [key, p] : kSweepParams)
    if (key == name) return p;
  std::string valid;
  for (const auto& [key, p] : kSweepParams) valid += (valid.empty() ? "" : ", ") + std::string(key);
  throw Error("unknown sweep parameter '" + std::string(name) + "'; valid names: " + valid);
}

std::string_view to_string(SweepParam p) noexcept {
  for (const auto& [key, q] : kSweepParams)
    if (q == p) return key;
  return "unknown";
}

std::vector<SweepEntry> sweep(const CrowdConfig& base, const SwitchRule& rule, SweepParam param,
                              std::span<const double> values, const ForceProfile& profile,
                              std::uint64_t seed, SeedPolicy policy, const RunOptions& options,
                              std::size_t jobs) {
  for (double v : values)
    if (!std::isfinite(v)) throw Error("sweep: values must be finite");

  std::vector<SweepEntry> out(values.size());
  std::vector<std::exception_ptr> errors(values.size());

  auto work = [&](std::size_t k) {
    try {
      CrowdConfig cfg = base;
      SwitchRule r = rule;
      apply(param, values[k], cfg, r);
      const std::uint64_t s = policy == SeedPolicy::Fixed ? seed : derive_seed(seed, k);
      out[k] = {values[k], s, summarize(run(cfg, r, profile, s, options))};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, values.size()));
  if (jobs == 1) {
    for (std::size_t k = 0; k < values.size(); ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < values.size(); k = next++) work(k);
      });
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

MonteCarloEstimate forced_ratio_run(const CrowdConfig& config, double ratio, double dO_drive,
                                    double noise_amp, std::size_t trials, std::uint64_t seed) {
  config.validate();
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw Error("forced_ratio_run: ratio must lie in [0, 1]");
  if (!(noise_amp >= 0.0)) throw Error("forced_ratio_run: noise_amp must be >= 0");
  if (trials == 0) throw Error("forced_ratio_run: trials must be >= 1");

  const std::size_t n = config.n();
  const auto n_reactive = static_cast<std::size_t>(std::round(ratio * static_cast<double>(n)));
  const auto states = assign_states(config.agents, std::min(n_reactive, n));
  const std::size_t effective_trials = noise_amp == 0.0 ? 1 : trials;

  std::vector<double> ds(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < effective_trials; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double eps = 0.0;
      if (noise_amp > 0.0) {
        Stream rng(seed, i, k);
        eps = rng.uniform(-noise_amp, noise_amp);
      }
      ds[i] = agent_step(config.agents[i], states[i], 0.0, dO_drive, eps);
    }
    const double r = order_parameter(ds);
    sum += r;
    sum_sq += r * r;
  }
  const auto t = static_cast<double>(effective_trials);
  const double m = sum / t;
  const double var = effective_trials > 1 ? std::max(0.0, (sum_sq - t * m * m) / (t - 1.0)) : 0.0;
  return {m, std::sqrt(var / t)};
}

}  // namespace crowdsync
