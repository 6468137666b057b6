#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "crowdsync/error.hpp"
#include "crowdsync/scenario.hpp"
#include "crowdsync/scenario_file.hpp"
#include "crowdsync/table.hpp"

namespace crowdsync::cli {

namespace {

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    auto tok = rest.substr(0, comma);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
      throw Error("--values: bad number '" + std::string(tok) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

struct RunArgs {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int do_run(const RunArgs& args, std::ostream& out) {
  auto file = load_scenario(args.scenario);
  if (args.seed) file.seed = *args.seed;
  const auto result = run(file.crowd(), file.rule, file.force(), file.seed, file.options());
  const auto summary = summarize(result);
  const std::filesystem::path dir(args.out);

  write_file(dir / "series.csv", render([&](std::ostream& o) { emit_table(result, o); }));
  write_file(dir / "windows.csv", render([&](std::ostream& o) { emit_windows(result.windows, o); }));
  if (file.path == SimulationPath::PerAgent)
    write_file(dir / "actions.csv", render([&](std::ostream& o) { emit_actions(result, o); }));
  const auto summary_text = render([&](std::ostream& o) { emit_summary(file.name, file.seed, summary, o); });
  write_file(dir / "summary.csv", summary_text);
  out << summary_text;
  return 0;
}

struct SweepArgs {
  std::string scenario;
  std::string param;
  std::string values;
  std::string out;
  std::string seed_policy = "fixed";
  std::size_t jobs = 1;
};

int do_sweep(const SweepArgs& args, std::ostream& out) {
  const auto file = load_scenario(args.scenario);
  const auto param = parse_sweep_param(args.param);
  const auto values = parse_values(args.values);
  const auto policy = args.seed_policy == "per-value" ? SeedPolicy::PerValue : SeedPolicy::Fixed;
  const auto entries =
      sweep(file.crowd(), file.rule, param, values, file.force(), file.seed, policy, file.options(), args.jobs);
  const auto text = render([&](std::ostream& o) { emit_sweep(param, entries, o); });
  write_file(std::filesystem::path(args.out) / "sweep.csv", text);
  out << text;
  return 0;
}

struct MetricsArgs {
  std::string table;
  std::string panel;
  std::size_t window = 20;
  bool overlap = false;
  std::string out;
};

int do_metrics(const MetricsArgs& args, std::ostream& out) {
  auto in = open_input(args.table);
  auto records = read_table(in);
  if (!args.panel.empty()) {
    auto panel = open_input(args.panel);
    attach_actions(records, panel);
  }
  const auto windows = windowed_reports(records, args.window, args.overlap);
  const auto text = render([&](std::ostream& o) { emit_windows(windows, o); });
  if (args.out.empty())
    out << text;
  else
    write_file(args.out, text);
  return 0;
}

struct CurveArgs {
  std::string scenario;
  std::string kind;
  std::string out;
  std::size_t points = 11;
  std::size_t trials = 1000;
  double drive = 1.0;
  std::optional<double> max_noise;
  std::optional<std::uint64_t> seed;
};

int do_curve(const CurveArgs& args, std::ostream& out) {
  const auto file = load_scenario(args.scenario);
  const auto crowd = file.crowd();
  crowd.validate();
  const std::uint64_t seed = args.seed.value_or(file.seed);
  if (args.points < 2) throw Error("--points must be >= 2");

  std::vector<CurvePoint> curve;
  const auto steps = static_cast<double>(args.points - 1);
  if (args.kind == "order-vs-ratio") {
    const double e = file.noise == NoiseKind::Uniform ? file.noise_amp : 0.0;
    for (std::size_t k = 0; k < args.points; ++k) {
      const double ratio = static_cast<double>(k) / steps;
      curve.push_back({ratio, forced_ratio_run(crowd, ratio, args.drive, e, args.trials, seed)});
    }
  } else if (args.kind == "order-vs-noise") {
    double b_high = 0.0;
    for (const auto& ag : crowd.agents) b_high += ag.b_high;
    b_high /= static_cast<double>(crowd.n());
    const double top = args.max_noise.value_or(10.0 * b_high * std::abs(args.drive));
    for (std::size_t k = 0; k < args.points; ++k) {
      const double e = top * static_cast<double>(k) / steps;
      curve.push_back({e, forced_ratio_run(crowd, 1.0, args.drive, e, args.trials, seed)});
    }
  } else {
    throw Error("--kind must be order-vs-ratio or order-vs-noise");
  }
  const auto text = render([&](std::ostream& o) { emit_curve(curve, o); });
  write_file(std::filesystem::path(args.out) / "curve.csv", text);
  out << text;
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-organized crowd synchronization simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its tables");
  run_cmd->add_option("--scenario", run_args.scenario, "Scenario file")->required();
  run_cmd->add_option("--out", run_args.out, "Output directory")->required();
  run_cmd->add_option("--seed", run_args.seed, "Override run.seed");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over a list of values");
  sweep_cmd->add_option("--scenario", sweep_args.scenario, "Scenario file")->required();
  sweep_cmd->add_option("--param", sweep_args.param,
                        "a, b_high, b_low, n, noise_amp or saturation_scale")->required();
  sweep_cmd->add_option("--values", sweep_args.values, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "Output directory")->required();
  sweep_cmd->add_option("--seed-policy", sweep_args.seed_policy, "fixed or per-value")
      ->check(CLI::IsMember({"fixed", "per-value"}));
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "Recompute windowed metrics from a series table");
  metrics_cmd->add_option("--table", metrics_args.table, "series.csv from `run`")->required();
  metrics_cmd->add_option("--window", metrics_args.window, "Window length in steps")->check(CLI::PositiveNumber);
  metrics_cmd->add_option("--panel", metrics_args.panel, "actions.csv from `run`, enables rho_c");
  metrics_cmd->add_flag("--overlap", metrics_args.overlap, "Slide the window by one step");
  metrics_cmd->add_option("--out", metrics_args.out, "Output file (default stdout)");

  CurveArgs curve_args;
  auto* curve_cmd = app.add_subcommand("curve", "Order parameter versus reactive ratio or noise");
  curve_cmd->add_option("--scenario", curve_args.scenario, "Scenario file")->required();
  curve_cmd->add_option("--kind", curve_args.kind, "order-vs-ratio or order-vs-noise")
      ->required()
      ->check(CLI::IsMember({"order-vs-ratio", "order-vs-noise"}));
  curve_cmd->add_option("--out", curve_args.out, "Output directory")->required();
  curve_cmd->add_option("--points", curve_args.points, "Number of x values");
  curve_cmd->add_option("--trials", curve_args.trials, "Monte-Carlo trials per point")->check(CLI::PositiveNumber);
  curve_cmd->add_option("--drive", curve_args.drive, "Observation change dO driving the step");
  curve_cmd->add_option("--max-noise", curve_args.max_noise, "Largest noise half-width (order-vs-noise)");
  curve_cmd->add_option("--seed", curve_args.seed, "Override run.seed");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a scenario file");
  validate_cmd->add_option("--scenario", validate_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*run_cmd) return do_run(run_args, out);
    if (*sweep_cmd) return do_sweep(sweep_args, out);
    if (*metrics_cmd) return do_metrics(metrics_args, out);
    if (*curve_cmd) return do_curve(curve_args, out);
    if (*validate_cmd) {
      const auto file = load_scenario(validate_path);
      out << "ok: " << file.name << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace crowdsync::cli
