#include "volcp/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "volcp/errors.hpp"
#include "volcp/parallel.hpp"
#include "volcp/rng.hpp"
#include "volcp/stats.hpp"

namespace volcp {

void ExperimentConfig::validate() const {
  model.validate();
  if (replications < 1)
    throw input_error("experiment: replications must be at least 1");
  if (!(trim_delta >= 0.0 && trim_delta < 0.5))
    throw input_error("experiment: trim delta must lie in [0, 1/2)");
  if (bandwidth_override && !(*bandwidth_override > 0.0))
    throw input_error("experiment: bandwidth override must be positive");
  if (want_dv_at_k0 && drift_mode != ResidualMode::EstimatedDrift)
    throw input_error("experiment: dv_at_k0 output needs estimated-drift mode");
}

namespace {

McRecord run_one(const ExperimentConfig& cfg, const McTables& tables,
                 std::size_t r) {
  McRecord rec;
  rec.replication = r;

  const SamplePath path = simulate_path(cfg.model, derive_seed(cfg.seed, r));

  ResidualSeries res;
  if (cfg.drift_mode == ResidualMode::KnownCoefficients) {
    res = residuals_known(path, cfg.model.drift, cfg.model.diffusion);
  } else {
    const double h = cfg.bandwidth_override
                         ? *cfg.bandwidth_override
                         : silverman_bandwidth(std::vector<double>(
                               path.values.begin(), path.values.end() - 1));
    res = residuals_estimated(path, nw_drift(path, cfg.kernel, h));
  }

  const CusumTrace trace = cusum_stats(res);
  const ChangePointFit fit =
      estimate_changepoint(trace, cfg.trim_delta, res.mode);
  rec.k_hat = fit.k_hat;
  rec.tau_hat = fit.tau_hat;
  rec.theta1_hat = fit.theta1_hat;
  rec.theta2_hat = fit.theta2_hat;
  rec.vartheta_hat = fit.vartheta_hat;
  rec.z_bar = fit.z_bar;

  if (cfg.want_statistics) {
    const H0Stats stats = h0_statistics(trace, cfg.trim_delta, trace.z_bar);
    rec.stat_d = stats.stat_d;
    rec.stat_v = stats.stat_v;
  }
  if (cfg.want_test) {
    rec.reject =
        test_no_change(trace, cfg.trim_delta, cfg.alpha, *tables.h0).reject;
  }
  if (cfg.want_tau_ci) {
    const IntervalEstimate ci = ci_changepoint(
        fit, cfg.tau_coverage, *tables.argmax, cfg.theta_tilde_mode);
    rec.ci_tau_lower = ci.lower;
    rec.ci_tau_upper = ci.upper;
    rec.ci_tau_hit = ci.lower <= cfg.model.tau0 && cfg.model.tau0 <= ci.upper;
  }
  if (cfg.want_theta_ci) {
    const auto [ci1, ci2] = ci_thetas(fit, cfg.theta_coverage);
    rec.ci_theta1_lower = ci1.lower;
    rec.ci_theta1_upper = ci1.upper;
    rec.ci_theta1_hit =
        ci1.lower <= cfg.model.theta1 && cfg.model.theta1 <= ci1.upper;
    rec.ci_theta2_lower = ci2.lower;
    rec.ci_theta2_upper = ci2.upper;
    rec.ci_theta2_hit =
        ci2.lower <= cfg.model.theta2 && cfg.model.theta2 <= ci2.upper;
  }
  if (cfg.want_dv_at_k0) {
    // Known-drift comparison statistic under the reduced model (unit
    // diffusion), evaluated at the true change index.
    const ResidualSeries res_known = residuals_known(
        path, cfg.model.drift, [](double) { return 1.0; });
    const CusumTrace trace_known = cusum_stats(res_known);
    const std::size_t k0 = *path.change_index_true;
    if (k0 >= 1 && k0 < trace.n) {
      rec.sqrtn_dv_at_k0 = std::sqrt(static_cast<double>(trace.n)) *
                           (trace.v_at(k0) - trace_known.v_at(k0));
    }
  }
  return rec;
}

}  // namespace

McAggregates aggregate_records(const ExperimentConfig& cfg,
                               const std::vector<McRecord>& records) {
  McAggregates agg;
  std::vector<double> abs_tau_err;
  double sum_t1 = 0.0, sum_t2 = 0.0;
  std::vector<double> sn_t1_err, sn_t2_err;
  std::size_t rejections = 0, with_reject = 0;
  std::size_t tau_hits = 0, with_tau_ci = 0;
  std::size_t t1_hits = 0, with_t1_ci = 0;
  std::size_t t2_hits = 0, with_t2_ci = 0;

  const double sqrt_n = std::sqrt(static_cast<double>(cfg.model.n));
  for (const McRecord& rec : records) {
    if (rec.failed) {
      ++agg.failed;
      continue;
    }
    ++agg.completed;
    abs_tau_err.push_back(std::fabs(rec.tau_hat - cfg.model.tau0));
    sum_t1 += rec.theta1_hat;
    sum_t2 += rec.theta2_hat;
    sn_t1_err.push_back(sqrt_n * (rec.theta1_hat - cfg.model.theta1));
    sn_t2_err.push_back(sqrt_n * (rec.theta2_hat - cfg.model.theta2));
    if (rec.reject) {
      ++with_reject;
      if (*rec.reject) ++rejections;
    }
    if (rec.ci_tau_hit) {
      ++with_tau_ci;
      if (*rec.ci_tau_hit) ++tau_hits;
    }
    if (rec.ci_theta1_hit) {
      ++with_t1_ci;
      if (*rec.ci_theta1_hit) ++t1_hits;
    }
    if (rec.ci_theta2_hit) {
      ++with_t2_ci;
      if (*rec.ci_theta2_hit) ++t2_hits;
    }
  }

  if (agg.completed > 0) {
    agg.median_abs_tau_error = median_of(abs_tau_err);
    agg.mean_theta1_hat = sum_t1 / static_cast<double>(agg.completed);
    agg.mean_theta2_hat = sum_t2 / static_cast<double>(agg.completed);
  }
  if (agg.completed > 1) {
    auto sample_var = [](const std::vector<double>& xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      return ss / static_cast<double>(xs.size() - 1);
    };
    agg.var_sqrtn_theta1_error = sample_var(sn_t1_err);
    agg.var_sqrtn_theta2_error = sample_var(sn_t2_err);
  }
  if (with_reject > 0)
    agg.rejection_rate =
        static_cast<double>(rejections) / static_cast<double>(with_reject);
  if (with_tau_ci > 0)
    agg.tau_ci_coverage =
        static_cast<double>(tau_hits) / static_cast<double>(with_tau_ci);
  if (with_t1_ci > 0)
    agg.theta1_ci_coverage =
        static_cast<double>(t1_hits) / static_cast<double>(with_t1_ci);
  if (with_t2_ci > 0)
    agg.theta2_ci_coverage =
        static_cast<double>(t2_hits) / static_cast<double>(with_t2_ci);
  return agg;
}

McSummary run_replications(const ExperimentConfig& cfg,
                           const McTables& tables) {
  cfg.validate();
  if (cfg.want_test && !tables.h0)
    throw input_error("experiment: test output requested without an H0 table");
  if (cfg.want_tau_ci && !tables.argmax)
    throw input_error(
        "experiment: tau interval requested without an argmax table");

  McSummary summary;
  summary.config = cfg;
  summary.records.resize(cfg.replications);
  parallel_for(cfg.replications, [&](std::size_t r) {
    try {
      summary.records[r] = run_one(cfg, tables, r);
    } catch (const std::exception& e) {
      summary.records[r].replication = r;
      summary.records[r].failed = true;
      summary.records[r].error = e.what();
    }
  });

  std::size_t failures = 0;
  for (const McRecord& rec : summary.records) {
    if (!rec.failed) continue;
    ++failures;
    if (failures > cfg.failure_budget) {
      std::ostringstream msg;
      msg << "replication " << rec.replication << " failed (" << rec.error
          << "); failure budget " << cfg.failure_budget << " exhausted";
      throw numeric_error(msg.str());
    }
  }

  summary.aggregates = aggregate_records(cfg, summary.records);
  return summary;
}

RateReport rate_check(const std::vector<RatePoint>& points) {
  if (points.size() < 3)
    throw input_error("rate check: need at least 3 sample sizes");
  RateReport report;
  report.points = points;

  std::vector<double> lx, ly;
  for (const RatePoint& pt : points) {
    if (!(pt.n > 0.0) || !(pt.median_error > 0.0))
      throw numeric_error("rate check: sample sizes and medians must be positive");
    lx.push_back(std::log(pt.n));
    ly.push_back(std::log(pt.median_error));
  }
  const double m = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0))
    throw input_error("rate check: sample sizes must be distinct");
  report.slope = sxy / sxx;
  report.intercept = my - report.slope * mx;
  report.residuals.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    report.residuals[i] = ly[i] - (report.intercept + report.slope * lx[i]);
  return report;
}

RateReport rate_check(const std::vector<McSummary>& summaries) {
  std::vector<RatePoint> points;
  points.reserve(summaries.size());
  for (const McSummary& s : summaries) {
    points.push_back(RatePoint{static_cast<double>(s.config.model.n),
                               s.aggregates.median_abs_tau_error});
  }
  return rate_check(points);
}

double ks_distance(std::vector<double> sample_a, std::vector<double> sample_b) {
  if (sample_a.empty() || sample_b.empty())
    throw input_error("ks distance: samples must be nonempty");
  std::sort(sample_a.begin(), sample_a.end());
  std::sort(sample_b.begin(), sample_b.end());
  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  std::size_t i = 0, j = 0;
  double max_diff = 0.0;
  while (i < sample_a.size() && j < sample_b.size()) {
    const double x = std::min(sample_a[i], sample_b[j]);
    while (i < sample_a.size() && sample_a[i] <= x) ++i;
    while (j < sample_b.size() && sample_b[j] <= x) ++j;
    max_diff = std::max(max_diff, std::fabs(static_cast<double>(i) / na -
                                            static_cast<double>(j) / nb));
  }
  return max_diff;
}

double ks_distance(std::vector<double> sample,
                   const std::function<double(double)>& cdf) {
  if (sample.empty()) throw input_error("ks distance: sample must be nonempty");
  if (!cdf) throw input_error("ks distance: cdf must be set");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double max_diff = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    max_diff = std::max(max_diff,
                        std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
  }
  return max_diff;
}

}  // namespace volcp
