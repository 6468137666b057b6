#include "crowdsync/sync_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crowdsync/error.hpp"
#include "crowdsync/rng.hpp"

namespace crowdsync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double abs_ratio(std::span<const double> x) noexcept {
  double sum = 0.0;
  double sum_abs = 0.0;
  for (double v : x) {
    sum += v;
    sum_abs += std::abs(v);
  }
  if (sum_abs == 0.0) return 0.0;
  return std::min(1.0, std::abs(sum) / sum_abs);
}

}  // namespace

double order_parameter(std::span<const double> dS_i) noexcept { return abs_ratio(dS_i); }

double order_parameter_closed_form(double ratio, double b_high_avg, double b_low_avg,
                                   double b_abs_low_avg) {
  const double num = ratio * (b_high_avg - b_low_avg) + b_low_avg;
  const double den = ratio * (b_high_avg - b_abs_low_avg) + b_abs_low_avg;
  if (!(den > 0.0))
    throw DegenerateError("order_parameter_closed_form: denominator " + std::to_string(den) +
                          " is not positive");
  return num / den;
}

MonteCarloEstimate order_parameter_with_noise(double ratio, double b_high_avg, double dO, double e,
                                              std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (n == 0 || trials == 0) throw Error("order_parameter_with_noise: n and trials must be >= 1");
  const auto n_reactive = static_cast<std::size_t>(
      std::clamp(std::round(ratio * static_cast<double>(n)), 0.0, static_cast<double>(n)));
  std::vector<double> ds(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      Stream rng(seed, i, k);
      const double b = i < n_reactive ? b_high_avg : 0.0;
      ds[i] = b * dO + rng.uniform(-e, e);
    }
    const double r = order_parameter(ds);
    sum += r;
    sum_sq += r * r;
  }
  const auto t = static_cast<double>(trials);
  const double m = sum / t;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - t * m * m) / (t - 1.0)) : 0.0;
  return {m, std::sqrt(var / t)};
}

double mean(std::span<const double> x) noexcept {
  if (x.empty()) return kNaN;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double population_sigma(std::span<const double> x) noexcept {
  if (x.empty()) return kNaN;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double pairwise_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("pairwise_correlation: length mismatch " + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()));
  if (x.size() < 2) throw Error("pairwise_correlation: need at least two samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  // The 1/T factors cancel.
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DecisionPanel::DecisionPanel(std::vector<double> values, std::size_t agents, std::size_t steps)
    : series_(std::move(values)), agents_(agents), steps_(steps) {
  if (agents_ == 0) throw Error("DecisionPanel: no agents");
  if (steps_ < 2) throw Error("DecisionPanel: need at least two steps");
  if (series_.size() != agents_ * steps_)
    throw Error("DecisionPanel: series has " + std::to_string(series_.size()) + " entries, expected " +
                std::to_string(agents_ * steps_));

  // Centre once, then every correlation is a dot product.
  std::vector<double> centred(series_.size());
  std::vector<double> norm(agents_);
  sigma_.resize(agents_);
  const auto t = static_cast<double>(steps_);
  for (std::size_t i = 0; i < agents_; ++i) {
    const auto row = series(i);
    const double m = mean(row);
    double ss = 0.0;
    for (std::size_t k = 0; k < steps_; ++k) {
      const double d = row[k] - m;
      centred[i * steps_ + k] = d;
      ss += d * d;
    }
    norm[i] = ss;
    sigma_[i] = std::sqrt(ss / t);
  }

  corr_.assign(agents_ * agents_, 0.0);
  for (std::size_t i = 0; i < agents_; ++i) {
    if (norm[i] == 0.0) continue;
    corr_[i * agents_ + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      if (norm[j] == 0.0) continue;
      double dot = 0.0;
      const double* xi = centred.data() + i * steps_;
      const double* xj = centred.data() + j * steps_;
      for (std::size_t k = 0; k < steps_; ++k) dot += xi[k] * xj[k];
      const double r = std::clamp(dot / std::sqrt(norm[i] * norm[j]), -1.0, 1.0);
      corr_[i * agents_ + j] = r;
      corr_[j * agents_ + i] = r;
    }
  }
}

std::vector<double> DecisionPanel::aggregate_series() const {
  std::vector<double> total(steps_, 0.0);
  for (std::size_t i = 0; i < agents_; ++i) {
    const auto row = series(i);
    for (std::size_t k = 0; k < steps_; ++k) total[k] += row[k];
  }
  return total;
}

double crowd_volatility(std::span<const double> sigma, std::span<const double> corr) {
  const std::size_t n = sigma.size();
  if (corr.size() != n * n)
    throw Error("crowd_volatility: correlation matrix is not " + std::to_string(n) + "x" +
                std::to_string(n));
  double var = 0.0;
  double scale = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    var += sigma[l] * sigma[l];
    scale += sigma[l];
    for (std::size_t m = 0; m < l; ++m) var += 2.0 * corr[l * n + m] * sigma[l] * sigma[m];
  }
  if (var < 0.0) {
    if (var < -1e-12 * scale * scale)
      throw Error("crowd_volatility: correlation matrix is not positive semidefinite (variance " +
                  std::to_string(var) + ")");
    var = 0.0;
  }
  return std::sqrt(var);
}

double crowd_correlation(const DecisionPanel& panel) {
  const auto sigma = panel.per_agent_sigma();
  if (std::all_of(sigma.begin(), sigma.end(), [](double s) { return s == 0.0; }))
    throw DegenerateError("crowd_correlation: no agent varies over the window");
  const double sigma_c = crowd_volatility(sigma, panel.corr());
  if (sigma_c == 0.0) throw DegenerateError("crowd_correlation: aggregate action is constant");
  const std::size_t n = panel.agents();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sigma[i] == 0.0) continue;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) weighted += panel.corr(i, j) * sigma[j];
    // corr(dS_i, sum dS); rounding can push a perfectly locked crowd past 1
    sum += std::clamp(weighted / sigma_c, -1.0, 1.0);
  }
  return sum / static_cast<double>(n);
}

double crowd_correlation_direct(const DecisionPanel& panel) {
  const auto sigma = panel.per_agent_sigma();
  if (std::all_of(sigma.begin(), sigma.end(), [](double s) { return s == 0.0; }))
    throw DegenerateError("crowd_correlation_direct: no agent varies over the window");
  const auto total = panel.aggregate_series();
  if (population_sigma(total) == 0.0)
    throw DegenerateError("crowd_correlation_direct: aggregate action is constant");
  double sum = 0.0;
  for (std::size_t i = 0; i < panel.agents(); ++i) sum += pairwise_correlation(panel.series(i), total);
  return sum / static_cast<double>(panel.agents());
}

double trendiness(std::span<const double> dO) noexcept { return abs_ratio(dO); }

double observed_volatility_expanded(double a, std::span<const double> sigma,
                                    std::span<const double> corr) {
  const std::size_t n = sigma.size();
  if (corr.size() != n * n) throw Error("observed_volatility_expanded: correlation matrix size mismatch");
  const double a2 = a * a;
  double diag = 0.0;
  double cross = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    diag += a2 * sigma[l] * sigma[l];
    for (std::size_t m = 0; m < l; ++m) cross += a2 * 2.0 * corr[l * n + m] * sigma[l] * sigma[m];
  }
  return std::sqrt(std::max(0.0, diag + cross));
}

double SyncReport::mean_r() const noexcept { return mean(r_instant); }

SyncReport sync_report(std::span<const StepRecord> records) {
  SyncReport out;
  if (records.empty()) {
    out.rho_c = out.sigma_c = out.sigma_o = kNaN;
    return out;
  }
  std::vector<double> ds, d_o;
  ds.reserve(records.size());
  d_o.reserve(records.size());
  out.r_instant.reserve(records.size());
  for (const auto& r : records) {
    out.r_instant.push_back(r.R);
    ds.push_back(r.dS);
    d_o.push_back(r.dO);
  }
  out.sigma_c = population_sigma(ds);
  out.sigma_o = population_sigma(d_o);
  out.t_d = trendiness(d_o);

  out.rho_c = kNaN;
  const std::size_t n = records.front().dS_i.size();
  const bool have_panel = n > 0 && records.size() >= 2 &&
                          std::all_of(records.begin(), records.end(),
                                      [n](const StepRecord& r) { return r.dS_i.size() == n; });
  if (have_panel) {
    std::vector<double> series(n * records.size());
    for (std::size_t k = 0; k < records.size(); ++k)
      for (std::size_t i = 0; i < n; ++i) series[i * records.size() + k] = records[k].dS_i[i];
    try {
      out.rho_c = crowd_correlation(DecisionPanel(std::move(series), n, records.size()));
    } catch (const DegenerateError&) {
      // quiescent window: synchronization undefined
    }
  }
  return out;
}

std::vector<WindowReport> windowed_reports(std::span<const StepRecord> records, std::size_t window,
                                           bool overlap) {
  if (window == 0) throw Error("windowed_reports: window must be >= 1");
  std::vector<WindowReport> out;
  const std::size_t stride = overlap ? 1 : window;
  for (std::size_t start = 0; start + window <= records.size(); start += stride)
    out.push_back({records[start].t, records[start].t + window, sync_report(records.subspan(start, window))});
  return out;
}

}  // namespace crowdsync
