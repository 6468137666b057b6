#include "crowdsync/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "crowdsync/error.hpp"

namespace crowdsync {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

double parse_real(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error("table line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error("table line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // no "-0"
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void emit_table(const ScenarioResult& result, std::ostream& out) {
  out << kSeriesHeader << '\n';
  const auto n = static_cast<double>(result.n);
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    const auto& r = result.records[k];
    out << r.t << ',' << format_number(r.E) << ',' << format_number(r.dE) << ',' << format_number(r.S) << ','
        << format_number(r.dS) << ',' << format_number(r.O) << ',' << format_number(r.dO) << ','
        << r.n_reactive << ',' << format_number(static_cast<double>(r.n_reactive) / n) << ','
        << format_number(r.b_total) << ',' << format_number(r.ab) << ',' << format_number(r.R) << ','
        << to_string(result.stability_trace[k]) << '\n';
  }
}

void emit_table(const ScenarioResult& result, const std::filesystem::path& path) {
  std::ostringstream ss;
  emit_table(result, ss);
  write_file(path, ss.str());
}

void emit_actions(const ScenarioResult& result, std::ostream& out) {
  out << 't';
  for (std::size_t i = 0; i < result.n; ++i) out << ",dS_" << i;
  out << '\n';
  for (const auto& r : result.records) {
    if (r.dS_i.empty()) continue;
    out << r.t;
    for (double x : r.dS_i) out << ',' << format_number(x);
    out << '\n';
  }
}

void emit_windows(std::span<const WindowReport> windows, std::ostream& out) {
  out << "start,end,mean_R,rho_c,sigma_c,sigma_o,t_d\n";
  for (const auto& w : windows)
    out << w.start << ',' << w.end << ',' << format_number(w.report.mean_r()) << ','
        << format_number(w.report.rho_c) << ',' << format_number(w.report.sigma_c) << ','
        << format_number(w.report.sigma_o) << ',' << format_number(w.report.t_d) << '\n';
}

void emit_summary(std::string_view scenario, std::uint64_t seed, const RunSummary& s, std::ostream& out) {
  out << "scenario,seed,status,steps_run,truncation_step,peak_ratio,final_ratio,peak_O,final_O,"
         "mean_R,rho_c,sigma_c,sigma_o,t_d\n";
  out << scenario << ',' << seed << ',' << (s.diverged ? "diverged" : "completed") << ',' << s.steps_run << ',';
  if (s.truncation_step) out << *s.truncation_step;
  out << ',' << format_number(s.peak_ratio) << ',' << format_number(s.final_ratio) << ','
      << format_number(s.peak_O) << ',' << format_number(s.final_O) << ','
      << format_number(s.whole_run.mean_r()) << ',' << format_number(s.whole_run.rho_c) << ','
      << format_number(s.whole_run.sigma_c) << ',' << format_number(s.whole_run.sigma_o) << ','
      << format_number(s.whole_run.t_d) << '\n';
}

void emit_sweep(SweepParam param, std::span<const SweepEntry> entries, std::ostream& out) {
  out << "param,param_value,seed,status,steps_run,peak_ratio,final_ratio,peak_O,final_O,"
         "mean_R,rho_c,sigma_c,sigma_o,t_d\n";
  for (const auto& e : entries) {
    const auto& s = e.summary;
    out << to_string(param) << ',' << format_number(e.value) << ',' << e.seed << ','
        << (s.diverged ? "diverged" : "completed") << ',' << s.steps_run << ','
        << format_number(s.peak_ratio) << ',' << format_number(s.final_ratio) << ','
        << format_number(s.peak_O) << ',' << format_number(s.final_O) << ','
        << format_number(s.whole_run.mean_r()) << ',' << format_number(s.whole_run.rho_c) << ','
        << format_number(s.whole_run.sigma_c) << ',' << format_number(s.whole_run.sigma_o) << ','
        << format_number(s.whole_run.t_d) << '\n';
  }
}

void emit_curve(std::span<const CurvePoint> points, std::ostream& out) {
  out << "x,mean_R,stderr_R\n";
  for (const auto& p : points)
    out << format_number(p.x) << ',' << format_number(p.r.mean) << ',' << format_number(p.r.std_error) << '\n';
}

std::vector<StepRecord> read_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("table is empty");
  strip_cr(line);
  if (line != kSeriesHeader) throw Error("table header mismatch: expected '" + std::string(kSeriesHeader) + "'");

  std::vector<StepRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 13)
      throw Error("table line " + std::to_string(line_no) + ": expected 13 columns, got " +
                  std::to_string(f.size()));
    StepRecord r;
    r.t = parse_count(f[0], line_no);
    r.E = parse_real(f[1], line_no);
    r.dE = parse_real(f[2], line_no);
    r.S = parse_real(f[3], line_no);
    r.dS = parse_real(f[4], line_no);
    r.O = parse_real(f[5], line_no);
    r.dO = parse_real(f[6], line_no);
    r.n_reactive = parse_count(f[7], line_no);
    r.b_total = parse_real(f[9], line_no);
    r.ab = parse_real(f[10], line_no);
    r.R = parse_real(f[11], line_no);
    records.push_back(std::move(r));
  }
  return records;
}

void attach_actions(std::vector<StepRecord>& records, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("actions table is empty");
  strip_cr(line);
  const auto header = split(line);
  if (header.empty() || header[0] != "t") throw Error("actions table header must start with 't'");
  const std::size_t n = header.size() - 1;

  std::size_t k = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != n + 1)
      throw Error("actions line " + std::to_string(line_no) + ": expected " + std::to_string(n + 1) + " columns");
    if (k >= records.size() || parse_count(f[0], line_no) != records[k].t)
      throw Error("actions line " + std::to_string(line_no) + ": step does not match the series table");
    auto& ds = records[k].dS_i;
    ds.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds[i] = parse_real(f[i + 1], line_no);
    ++k;
  }
  if (k != records.size())
    throw Error("actions table has " + std::to_string(k) + " rows, series has " + std::to_string(records.size()));
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace crowdsync
