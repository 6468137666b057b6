#include "crowdsync/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "crowdsync/error.hpp"

namespace crowdsync {

namespace {

const std::vector<std::string_view> kKnownKeys = {
    "name",
    "crowd.n", "crowd.a", "crowd.b_low", "crowd.b_high", "crowd.c", "crowd.b_low_sign",
    "crowd.noise", "crowd.noise_amp", "crowd.noise_mu", "crowd.noise_sigma", "crowd.dt",
    "rule.mode", "rule.window", "rule.saturation_scale",
    "profile.kind", "profile.height", "profile.onset", "profile.slope", "profile.start",
    "profile.end", "profile.build_slope", "profile.peak_step", "profile.crash_slope",
    "profile.crash_steps", "profile.confusion_amp", "profile.stabilize_step", "profile.series",
    "run.steps", "run.seed", "run.window", "run.overlap", "run.ceiling", "run.path",
    "run.initial_do",
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<std::string_view> suggest(std::string_view key) {
  std::optional<std::string_view> best;
  std::size_t best_d = 4;
  for (auto k : kKnownKeys) {
    const auto d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> to_integer(std::string_view s) {
  s = trim(s);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class Reader {
 public:
  std::map<std::string, Entry, std::less<>> entries;
  std::set<std::string, std::less<>> used;
  std::vector<std::string> problems;

  bool has(std::string_view key) const { return entries.find(key) != entries.end(); }

  void fail(std::string_view key, const std::string& msg) {
    const auto it = entries.find(key);
    if (it != entries.end())
      problems.push_back("line " + std::to_string(it->second.line) + ": " + std::string(key) + ": " + msg);
    else
      problems.push_back(std::string(key) + ": " + msg);
  }

  const Entry* find(std::string_view key, bool required) {
    const auto it = entries.find(key);
    if (it == entries.end()) {
      if (required) problems.push_back(std::string(key) + ": required key is missing");
      return nullptr;
    }
    used.insert(std::string(key));
    return &it->second;
  }

  double real(std::string_view key, double def, bool required = false) {
    const auto* e = find(key, required);
    if (!e) return def;
    const auto v = to_double(e->value);
    if (!v || !std::isfinite(*v)) {
      fail(key, "expected a finite number, got '" + e->value + "'");
      return def;
    }
    return *v;
  }

  template <class Int>
  Int integer(std::string_view key, Int def, bool required = false) {
    const auto* e = find(key, required);
    if (!e) return def;
    const auto v = to_integer<Int>(e->value);
    if (!v) {
      fail(key, "expected a non-negative integer, got '" + e->value + "'");
      return def;
    }
    return *v;
  }

  bool boolean(std::string_view key, bool def) {
    const auto* e = find(key, false);
    if (!e) return def;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail(key, "expected true or false, got '" + e->value + "'");
    return def;
  }

  std::vector<double> list(std::string_view key, bool required) {
    const auto* e = find(key, required);
    if (!e) return {};
    std::vector<double> out;
    std::string_view rest = e->value;
    while (true) {
      const auto comma = rest.find(',');
      const auto tok = trim(rest.substr(0, comma));
      const auto v = to_double(tok);
      if (!v || !std::isfinite(*v)) {
        fail(key, "expected a comma-separated list of finite numbers, bad entry '" + std::string(tok) + "'");
        return {};
      }
      out.push_back(*v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return out;
  }

  template <class Enum>
  Enum choice(std::string_view key, Enum def, const std::vector<std::pair<std::string_view, Enum>>& options) {
    const auto* e = find(key, false);
    if (!e) return def;
    for (const auto& [name, val] : options)
      if (name == e->value) return val;
    std::string valid;
    for (const auto& [name, val] : options) valid += (valid.empty() ? "" : ", ") + std::string(name);
    fail(key, "unknown value '" + e->value + "'; expected one of " + valid);
    return def;
  }
};

enum class ProfileTag { Zero, Step, Ramp, Bubble, Explicit };

const std::vector<std::pair<std::string_view, ProfileTag>> kProfileKinds = {
    {"zero", ProfileTag::Zero}, {"step", ProfileTag::Step}, {"ramp", ProfileTag::Ramp},
    {"bubble", ProfileTag::Bubble}, {"explicit", ProfileTag::Explicit}};
const std::vector<std::pair<std::string_view, NoiseKind>> kNoiseKinds = {
    {"none", NoiseKind::None}, {"uniform", NoiseKind::Uniform}, {"wiener", NoiseKind::Wiener}};
const std::vector<std::pair<std::string_view, LowSign>> kLowSigns = {
    {"fixed", LowSign::Fixed}, {"alternating", LowSign::Alternating}};
const std::vector<std::pair<std::string_view, SimulationPath>> kPaths = {
    {"per_agent", SimulationPath::PerAgent}, {"aggregate", SimulationPath::Aggregate}};
const std::vector<std::pair<std::string_view, int>> kRuleModes = {{"proportional_trailing_mean", 0}};

template <class Enum>
std::string_view name_of(const std::vector<std::pair<std::string_view, Enum>>& options, Enum v) {
  for (const auto& [name, val] : options)
    if (val == v) return name;
  return "?";
}

ForceKind read_profile(Reader& r) {
  const auto tag = r.choice("profile.kind", ProfileTag::Zero, kProfileKinds);
  switch (tag) {
    case ProfileTag::Zero:
      return ZeroForce{};
    case ProfileTag::Step:
      return StepForce{r.real("profile.height", 1.0), r.integer<std::size_t>("profile.onset", 0, true)};
    case ProfileTag::Ramp:
      return RampForce{r.real("profile.slope", 0.0, true), r.integer<std::size_t>("profile.start", 0, true),
                       r.integer<std::size_t>("profile.end", 0, true)};
    case ProfileTag::Bubble: {
      BubbleStory b;
      b.build_slope = r.real("profile.build_slope", 0.0, true);
      b.peak_step = r.integer<std::size_t>("profile.peak_step", 0, true);
      b.crash_slope = r.real("profile.crash_slope", 0.0, true);
      b.crash_steps = r.integer<std::size_t>("profile.crash_steps", 0);
      b.confusion_amp = r.real("profile.confusion_amp", 0.0);
      b.stabilize_step = r.integer<std::size_t>("profile.stabilize_step", 0, true);
      return b;
    }
    case ProfileTag::Explicit:
      return ExplicitForce{r.list("profile.series", true)};
  }
  return ZeroForce{};
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

}  // namespace

CrowdConfig ScenarioFile::crowd() const {
  std::vector<std::string> problems;
  for (const auto* list : {&b_low, &b_high, &c}) {
    if (list->size() != 1 && list->size() != n)
      problems.push_back("per-agent list has " + std::to_string(list->size()) + " values; expected 1 or " +
                         std::to_string(n));
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  CrowdConfig cfg;
  cfg.a = a;
  cfg.dt = dt;
  switch (noise) {
    case NoiseKind::None: cfg.noise = NoNoise{}; break;
    case NoiseKind::Uniform: cfg.noise = UniformNoise{noise_amp}; break;
    case NoiseKind::Wiener: cfg.noise = WienerNoise{noise_mu, noise_sigma}; break;
  }
  auto pick = [](const std::vector<double>& v, std::size_t i) { return v.size() == 1 ? v[0] : v[i]; };
  cfg.agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double low = pick(b_low, i);
    if (b_low_sign == LowSign::Alternating) low = (i % 2 == 0 ? 1.0 : -1.0) * std::abs(low);
    cfg.agents.push_back({i, low, pick(b_high, i), pick(c, i), noise == NoiseKind::Uniform ? noise_amp : 0.0});
  }
  return cfg;
}

ForceProfile ScenarioFile::force() const { return build_profile(profile, steps); }

RunOptions ScenarioFile::options() const {
  RunOptions o;
  o.path = path;
  o.ceiling = ceiling;
  o.metric_window = metric_window;
  o.overlap = overlap;
  o.initial_dO = initial_dO;
  return o;
}

ScenarioFile parse_scenario(std::string_view text) {
  Reader r;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      r.problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                           std::string(line) + "'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      std::string msg = "line " + std::to_string(line_no) + ": unknown key '" + key + "'";
      if (const auto s = suggest(key)) msg += " (did you mean '" + std::string(*s) + "'?)";
      r.problems.push_back(msg);
      continue;
    }
    if (const auto it = r.entries.find(key); it != r.entries.end()) {
      r.problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                           "' (first set on line " + std::to_string(it->second.line) + ")");
      continue;
    }
    r.entries.emplace(key, Entry{value, line_no});
  }

  ScenarioFile f;
  if (const auto* e = r.find("name", false)) f.name = e->value;
  f.n = r.integer<std::size_t>("crowd.n", 0, true);
  f.a = r.real("crowd.a", 0.0, true);
  f.b_low = r.list("crowd.b_low", true);
  f.b_high = r.list("crowd.b_high", true);
  f.c = r.list("crowd.c", true);
  f.b_low_sign = r.choice("crowd.b_low_sign", LowSign::Fixed, kLowSigns);
  f.noise = r.choice("crowd.noise", NoiseKind::None, kNoiseKinds);
  if (f.noise == NoiseKind::Uniform) f.noise_amp = r.real("crowd.noise_amp", 0.0, true);
  if (f.noise == NoiseKind::Wiener) {
    f.noise_mu = r.real("crowd.noise_mu", 0.0);
    f.noise_sigma = r.real("crowd.noise_sigma", 0.0);
  }
  f.dt = r.real("crowd.dt", 1.0);

  r.choice("rule.mode", 0, kRuleModes);
  f.rule.window = r.integer<std::size_t>("rule.window", 5);
  f.rule.saturation_scale = r.real("rule.saturation_scale", 1.0);

  f.profile = read_profile(r);

  f.steps = r.integer<std::size_t>("run.steps", 0, true);
  f.seed = r.integer<std::uint64_t>("run.seed", 0);
  f.metric_window = r.integer<std::size_t>("run.window", 20);
  f.overlap = r.boolean("run.overlap", false);
  f.ceiling = r.real("run.ceiling", 1e12);
  f.path = r.choice("run.path", SimulationPath::PerAgent, kPaths);
  f.initial_dO = r.real("run.initial_do", 0.0);

  for (const auto& [key, entry] : r.entries)
    if (!r.used.count(key)) r.fail(key, "not used with the selected crowd.noise / profile.kind");

  // Field-level invariants, reported against the line that set them.
  if (r.has("crowd.n") && f.n == 0) r.fail("crowd.n", "population must be >= 1");
  if (r.has("crowd.a") && !(f.a > 0.0)) r.fail("crowd.a", "must be > 0 (A > 0)");
  if (r.has("crowd.dt") && !(f.dt > 0.0)) r.fail("crowd.dt", "must be > 0");
  if (f.noise == NoiseKind::Uniform && f.noise_amp < 0.0) r.fail("crowd.noise_amp", "must be >= 0");
  if (f.noise == NoiseKind::Wiener && f.noise_sigma < 0.0) r.fail("crowd.noise_sigma", "must be >= 0");
  if (r.has("rule.window") && f.rule.window == 0) r.fail("rule.window", "must be >= 1");
  if (r.has("rule.saturation_scale") && !(f.rule.saturation_scale > 0.0))
    r.fail("rule.saturation_scale", "must be > 0");
  if (r.has("run.steps") && f.steps == 0) r.fail("run.steps", "must be >= 1");
  if (r.has("run.window") && f.metric_window == 0) r.fail("run.window", "must be >= 1");
  if (r.has("run.ceiling") && !(f.ceiling > 0.0)) r.fail("run.ceiling", "must be > 0");

  auto list_ok = [&](std::string_view key, const std::vector<double>& list) {
    if (list.empty()) return false;
    if (f.n > 0 && list.size() != 1 && list.size() != f.n) {
      r.fail(key, "has " + std::to_string(list.size()) + " values; expected 1 or crowd.n = " + std::to_string(f.n));
      return false;
    }
    return true;
  };
  const bool low_ok = list_ok("crowd.b_low", f.b_low);
  const bool high_ok = list_ok("crowd.b_high", f.b_high);
  const bool c_ok = list_ok("crowd.c", f.c);
  const bool lists_ok = f.n > 0 && low_ok && high_ok && c_ok;
  // the scalar coupling check does not need the rest of the crowd to be valid
  if (low_ok && high_ok && f.b_high.size() == 1 && f.b_low.size() == 1) {
    const double low = f.b_low_sign == LowSign::Alternating ? std::abs(f.b_low[0]) : f.b_low[0];
    if (!(f.b_high[0] > 0.0)) r.fail("crowd.b_high", "must be > 0 ({B_H} are always positive)");
    if (!(f.b_high[0] > low))
      r.fail("crowd.b_high", fmt(f.b_high[0]) + " must be greater than crowd.b_low " + fmt(low) +
                                 " ({B_H} greater than {B_L})");
  } else if (lists_ok && r.problems.empty()) {
    try {
      f.crowd().validate();
    } catch (const ValidationError& e) {
      for (const auto& p : e.problems()) r.problems.push_back(p);
    }
  }

  if (f.steps > 0) {
    try {
      build_profile(f.profile, f.steps);
    } catch (const ValidationError& e) {
      for (const auto& p : e.problems()) r.problems.push_back(p);
    }
  }

  if (!r.problems.empty()) throw ValidationError(std::move(r.problems));
  return f;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string to_text(const ScenarioFile& f) {
  std::ostringstream out;
  out << "name = " << f.name << '\n';
  out << "crowd.n = " << f.n << '\n';
  out << "crowd.a = " << fmt(f.a) << '\n';
  out << "crowd.b_low = " << join(f.b_low) << '\n';
  out << "crowd.b_high = " << join(f.b_high) << '\n';
  out << "crowd.c = " << join(f.c) << '\n';
  out << "crowd.b_low_sign = " << name_of(kLowSigns, f.b_low_sign) << '\n';
  out << "crowd.noise = " << name_of(kNoiseKinds, f.noise) << '\n';
  if (f.noise == NoiseKind::Uniform) out << "crowd.noise_amp = " << fmt(f.noise_amp) << '\n';
  if (f.noise == NoiseKind::Wiener) {
    out << "crowd.noise_mu = " << fmt(f.noise_mu) << '\n';
    out << "crowd.noise_sigma = " << fmt(f.noise_sigma) << '\n';
  }
  out << "crowd.dt = " << fmt(f.dt) << '\n';
  out << "rule.mode = proportional_trailing_mean\n";
  out << "rule.window = " << f.rule.window << '\n';
  out << "rule.saturation_scale = " << fmt(f.rule.saturation_scale) << '\n';

  struct ProfileWriter {
    std::ostringstream& out;
    void operator()(const ZeroForce&) const { out << "profile.kind = zero\n"; }
    void operator()(const StepForce& s) const {
      out << "profile.kind = step\nprofile.height = " << fmt(s.height) << "\nprofile.onset = " << s.onset << '\n';
    }
    void operator()(const RampForce& r) const {
      out << "profile.kind = ramp\nprofile.slope = " << fmt(r.slope) << "\nprofile.start = " << r.start
          << "\nprofile.end = " << r.end << '\n';
    }
    void operator()(const BubbleStory& b) const {
      out << "profile.kind = bubble\nprofile.build_slope = " << fmt(b.build_slope)
          << "\nprofile.peak_step = " << b.peak_step << "\nprofile.crash_slope = " << fmt(b.crash_slope)
          << "\nprofile.crash_steps = " << b.crash_steps << "\nprofile.confusion_amp = " << fmt(b.confusion_amp)
          << "\nprofile.stabilize_step = " << b.stabilize_step << '\n';
    }
    void operator()(const ExplicitForce& e) const {
      out << "profile.kind = explicit\nprofile.series = " << join(e.series) << '\n';
    }
  };
  std::visit(ProfileWriter{out}, f.profile);

  out << "run.steps = " << f.steps << '\n';
  out << "run.seed = " << f.seed << '\n';
  out << "run.window = " << f.metric_window << '\n';
  out << "run.overlap = " << (f.overlap ? "true" : "false") << '\n';
  out << "run.ceiling = " << fmt(f.ceiling) << '\n';
  out << "run.path = " << name_of(kPaths, f.path) << '\n';
  out << "run.initial_do = " << fmt(f.initial_dO) << '\n';
  return out.str();
}

}  // namespace crowdsync
