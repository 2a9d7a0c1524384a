#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "volcp/inference.hpp"
#include "volcp/model.hpp"

namespace volcp {

// Quantile tables a replication run may consume: an H0 table enables the
// no-change test, an argmax table enables the change-point interval.
struct McTables {
  std::optional<QuantileTable> h0;
  std::optional<QuantileTable> argmax;
};

struct ExperimentConfig {
  ModelSpec model;
  std::size_t replications = 1;
  std::uint64_t seed = 0;

  double trim_delta = 0.05;
  ResidualMode drift_mode = ResidualMode::KnownCoefficients;
  Kernel kernel;
  std::optional<double> bandwidth_override;

  // Requested outputs beyond the fit itself.
  bool want_statistics = true;
  bool want_test = false;      // needs tables.h0
  bool want_tau_ci = false;    // needs tables.argmax
  bool want_theta_ci = false;
  bool want_dv_at_k0 = false;  // estimated-drift mode only

  double alpha = 0.05;
  double tau_coverage = 0.9;
  double theta_coverage = 0.95;
  ThetaTildeMode theta_tilde_mode = ThetaTildeMode::Pooled;

  std::size_t failure_budget = 0;

  void validate() const;
};

struct McRecord {
  std::size_t replication = 0;
  bool failed = false;
  std::string error;

  std::size_t k_hat = 0;
  double tau_hat = 0.0;
  double theta1_hat = 0.0;
  double theta2_hat = 0.0;
  double vartheta_hat = 0.0;
  double z_bar = 0.0;

  std::optional<double> stat_d;
  std::optional<double> stat_v;
  std::optional<bool> reject;
  std::optional<double> ci_tau_lower, ci_tau_upper;
  std::optional<bool> ci_tau_hit;
  std::optional<double> ci_theta1_lower, ci_theta1_upper;
  std::optional<bool> ci_theta1_hit;
  std::optional<double> ci_theta2_lower, ci_theta2_upper;
  std::optional<bool> ci_theta2_hit;
  // sqrt(n) (Vhat_{k0} - V_{k0}): estimated- vs known-drift statistic at
  // the true change index, on the same path.
  std::optional<double> sqrtn_dv_at_k0;
};

struct McAggregates {
  std::size_t completed = 0;
  std::size_t failed = 0;
  double median_abs_tau_error = 0.0;
  double mean_theta1_hat = 0.0;
  double mean_theta2_hat = 0.0;
  // Sample variances of sqrt(n) (theta_hat - theta_true).
  std::optional<double> var_sqrtn_theta1_error;
  std::optional<double> var_sqrtn_theta2_error;
  std::optional<double> rejection_rate;
  std::optional<double> tau_ci_coverage;
  std::optional<double> theta1_ci_coverage;
  std::optional<double> theta2_ci_coverage;
};

struct McSummary {
  ExperimentConfig config;
  std::vector<McRecord> records;  // ordered by replication index
  McAggregates aggregates;
};

// Runs simulate -> residuals -> estimate -> infer, one stream per
// replication (derive_seed(seed, r)), in parallel. Records are folded in
// replication order, so the summary does not depend on the worker count.
// Throws once more than failure_budget replications fail.
McSummary run_replications(const ExperimentConfig& cfg,
                           const McTables& tables = {});

// Recomputes aggregates from the records; load paths use this as a
// self-consistency check.
McAggregates aggregate_records(const ExperimentConfig& cfg,
                               const std::vector<McRecord>& records);

struct RatePoint {
  double n = 0.0;
  double median_error = 0.0;
};

struct RateReport {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;  // log-scale fit residuals per point
};

// Least-squares slope of log(median error) against log(n) across an
// n-schedule with a fixed change size.
RateReport rate_check(const std::vector<McSummary>& summaries);
RateReport rate_check(const std::vector<RatePoint>& points);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> sample_a, std::vector<double> sample_b);
// One-sample distance against an exact CDF.
double ks_distance(std::vector<double> sample,
                   const std::function<double(double)>& cdf);

}  // namespace volcp
