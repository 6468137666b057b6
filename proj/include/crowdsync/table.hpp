#pragma once

/// Comma-separated output tables. Every real number is written with 17
/// significant digits so a 64-bit double survives the text round trip.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsync/scenario.hpp"

namespace crowdsync {

std::string format_number(double v);

inline constexpr std::string_view kSeriesHeader = "t,E,dE,S,dS,O,dO,N_H,ratio,B,AB,R,stability";

/// One row per step: t, E, dE, S, dS, O, dO, N_H, ratio, B, AB, R, stability.
void emit_table(const ScenarioResult& result, std::ostream& out);
void emit_table(const ScenarioResult& result, const std::filesystem::path& path);

/// Per-agent action increments: t, dS_0 .. dS_{N-1}. Empty on the aggregate path.
void emit_actions(const ScenarioResult& result, std::ostream& out);

void emit_windows(std::span<const WindowReport> windows, std::ostream& out);

/// Single-row run summary; status is "completed" or "diverged".
void emit_summary(std::string_view scenario, std::uint64_t seed, const RunSummary& summary,
                  std::ostream& out);

void emit_sweep(SweepParam param, std::span<const SweepEntry> entries, std::ostream& out);

struct CurvePoint {
  double x = 0.0;
  MonteCarloEstimate r;
};
void emit_curve(std::span<const CurvePoint> points, std::ostream& out);

/// Reads a table written by emit_table back into step records (dS_i empty).
std::vector<StepRecord> read_table(std::istream& in);

/// Fills records[k].dS_i from an actions table with matching t values.
void attach_actions(std::vector<StepRecord>& records, std::istream& in);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace crowdsync
