#include "volcp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "volcp/errors.hpp"
#include "volcp/parallel.hpp"
#include "volcp/rng.hpp"
#include "volcp/stats.hpp"

namespace volcp {

std::string limit_law_name(LimitLaw law) {
  switch (law) {
    case LimitLaw::BridgeSup: return "bridge_sup";
    case LimitLaw::WeightedBridgeSup: return "weighted_bridge_sup";
    case LimitLaw::ArgmaxDriftBM: return "argmax_drift_bm";
  }
  return "?";
}

LimitLaw limit_law_from_name(const std::string& name) {
  if (name == "bridge_sup") return LimitLaw::BridgeSup;
  if (name == "weighted_bridge_sup") return LimitLaw::WeightedBridgeSup;
  if (name == "argmax_drift_bm") return LimitLaw::ArgmaxDriftBM;
  throw input_error("unknown limit law '" + name + "'");
}

std::vector<double> default_probability_grid() {
  std::vector<double> grid(999);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = static_cast<double>(i + 1) / 1000.0;
  return grid;
}

double QuantileTable::quantile(double p) const {
  if (probabilities.empty())
    throw input_error("quantile table is empty");
  if (p < probabilities.front() || p > probabilities.back()) {
    std::ostringstream msg;
    msg << "probability " << p << " outside tabulated range ["
        << probabilities.front() << ", " << probabilities.back() << "]";
    throw input_error(msg.str());
  }
  const auto it =
      std::lower_bound(probabilities.begin(), probabilities.end(), p);
  const std::size_t hi = static_cast<std::size_t>(it - probabilities.begin());
  if (hi == 0 || probabilities[hi] == p) return quantiles[hi];
  const std::size_t lo = hi - 1;
  const double t =
      (p - probabilities[lo]) / (probabilities[hi] - probabilities[lo]);
  return quantiles[lo] + t * (quantiles[hi] - quantiles[lo]);
}

H0Stats h0_statistics(const CusumTrace& trace, double trim_delta,
                      double theta_tilde) {
  if (!(theta_tilde > 0.0))
    throw input_error("h0 statistics: theta_tilde must be positive");
  const TrimRange range = trimmed_range(trace.n, trim_delta);
  double max_d = 0.0;
  double max_v = 0.0;
  for (std::size_t k = range.lo; k <= range.hi; ++k) {
    max_d = std::max(max_d, std::fabs(trace.d_at(k)));
    max_v = std::max(max_v, std::fabs(trace.v_at(k)));
  }
  const double root = std::sqrt(static_cast<double>(trace.n) / 2.0);
  return H0Stats{root * max_d, root * max_v / theta_tilde};
}

namespace {

QuantileTable table_from_samples(std::vector<double> samples) {
  QuantileTable table;
  std::sort(samples.begin(), samples.end());
  table.probabilities = default_probability_grid();
  table.quantiles.reserve(table.probabilities.size());
  for (double p : table.probabilities)
    table.quantiles.push_back(quantile_sorted(samples, p));
  return table;
}

}  // namespace

QuantileTable simulate_bridge_sup(double trim_delta, bool weighted,
                                  const McConfig& mc) {
  if (mc.paths < 1000)
    throw input_error("bridge simulation: need at least 1000 paths");
  if (mc.grid < 1000)
    throw input_error("bridge simulation: need at least 1000 grid points");
  if (!(trim_delta >= 0.0 && trim_delta < 0.5))
    throw input_error("bridge simulation: trim delta must lie in [0, 1/2)");

  const std::size_t m = mc.grid;
  const double md = static_cast<double>(m);
  const std::size_t j_lo = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(trim_delta * md - 1e-9)));
  const std::size_t j_hi = std::min<std::size_t>(
      m - 1,
      static_cast<std::size_t>(std::floor((1.0 - trim_delta) * md + 1e-9)));
  if (j_lo > j_hi)
    throw input_error("bridge simulation: trimmed grid is empty");

  std::vector<double> sups(mc.paths);
  const double sqrt_dt = std::sqrt(1.0 / md);
  parallel_for(mc.paths, [&](std::size_t p) {
    Xoshiro256pp rng(derive_seed(mc.seed, p));
    std::vector<double> w(m + 1);
    w[0] = 0.0;
    for (std::size_t j = 1; j <= m; ++j)
      w[j] = w[j - 1] + sqrt_dt * rng.gaussian();
    const double w1 = w[m];
    double sup = 0.0;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      const double t = static_cast<double>(j) / md;
      double value = std::fabs(w[j] - t * w1);
      if (weighted) value /= std::sqrt(t * (1.0 - t));
      sup = std::max(sup, value);
    }
    sups[p] = sup;
  });

  QuantileTable table = table_from_samples(std::move(sups));
  table.target = weighted ? LimitLaw::WeightedBridgeSup : LimitLaw::BridgeSup;
  table.trim_delta = trim_delta;
  table.mc = mc;
  return table;
}

QuantileTable simulate_argmax_law(const McConfig& mc) {
  if (mc.paths < 1000)
    throw input_error("argmax simulation: need at least 1000 paths");
  if (!(mc.horizon >= 30.0))
    throw input_error("argmax simulation: horizon must be at least 30");
  if (!(mc.step > 0.0 && mc.step <= 0.01 * mc.horizon))
    throw input_error("argmax simulation: step must be positive and at most horizon/100");

  const std::size_t steps =
      static_cast<std::size_t>(std::llround(mc.horizon / mc.step));
  const double h = mc.step;
  const double sqrt_h = std::sqrt(h);

  std::vector<double> argmaxes(mc.paths);
  std::vector<std::uint8_t> hit(mc.paths, 0);
  parallel_for(mc.paths, [&](std::size_t p) {
    Xoshiro256pp rng(derive_seed(mc.seed, p));
    double best_value = 0.0;  // objective at v = 0
    double best_v = 0.0;
    // Negative side first, then positive; a fixed order keeps the argmax
    // deterministic under exact ties.
    for (int side = 0; side < 2; ++side) {
      const double sign = (side == 0) ? -1.0 : 1.0;
      double walk = 0.0;
      for (std::size_t j = 1; j <= steps; ++j) {
        walk += sqrt_h * rng.gaussian();
        const double v = sign * static_cast<double>(j) * h;
        const double value = walk - 0.5 * std::fabs(v);
        if (value > best_value) {
          best_value = value;
          best_v = v;
        }
      }
    }
    argmaxes[p] = best_v;
    hit[p] = (std::fabs(best_v) >= mc.horizon - 0.5 * h) ? 1 : 0;
  });

  std::size_t hits = 0;
  for (auto flag : hit) hits += flag;

  QuantileTable table = table_from_samples(std::move(argmaxes));
  table.target = LimitLaw::ArgmaxDriftBM;
  table.trim_delta = 0.0;
  table.mc = mc;
  table.boundary_hit_fraction =
      static_cast<double>(hits) / static_cast<double>(mc.paths);
  return table;
}

TestReport test_no_change(const CusumTrace& trace, double trim_delta,
                          double alpha, const QuantileTable& table) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw input_error("test: alpha must lie in (0,1)");
  if (table.target == LimitLaw::ArgmaxDriftBM)
    throw input_error("test: table targets the argmax law, not an H0 law");
  if (std::fabs(table.trim_delta - trim_delta) > 1e-12)
    throw input_error("test: table trim delta does not match the requested trim");

  const H0Stats stats = h0_statistics(trace, trim_delta, trace.z_bar);
  TestReport report;
  report.stat_d = stats.stat_d;
  report.stat_v = stats.stat_v;
  report.trim_delta = trim_delta;
  report.alpha = alpha;
  report.cv_target = table.target;
  report.cv_mc = table.mc;
  report.critical_value = table.quantile(1.0 - alpha);
  if (table.target == LimitLaw::BridgeSup) {
    report.statistic_used = TestStatistic::D;
    report.reject = stats.stat_d > report.critical_value;
  } else {
    report.statistic_used = TestStatistic::V;
    report.reject = stats.stat_v > report.critical_value;
  }
  return report;
}

std::string theta_tilde_mode_name(ThetaTildeMode mode) {
  switch (mode) {
    case ThetaTildeMode::Pooled: return "pooled";
    case ThetaTildeMode::Theta1: return "theta1";
    case ThetaTildeMode::Theta2: return "theta2";
  }
  return "?";
}

ThetaTildeMode theta_tilde_mode_from_name(const std::string& name) {
  if (name == "pooled") return ThetaTildeMode::Pooled;
  if (name == "theta1") return ThetaTildeMode::Theta1;
  if (name == "theta2") return ThetaTildeMode::Theta2;
  throw input_error("unknown theta-tilde mode '" + name + "'");
}

double theta_tilde_value(const ChangePointFit& fit, ThetaTildeMode mode) {
  switch (mode) {
    case ThetaTildeMode::Pooled: return fit.z_bar;
    case ThetaTildeMode::Theta1: return fit.theta1_hat;
    case ThetaTildeMode::Theta2: return fit.theta2_hat;
  }
  return fit.z_bar;
}

IntervalEstimate ci_changepoint(const ChangePointFit& fit, double coverage,
                                const QuantileTable& table,
                                ThetaTildeMode mode) {
  if (!(coverage > 0.0 && coverage < 1.0))
    throw input_error("ci: coverage must lie in (0,1)");
  if (table.target != LimitLaw::ArgmaxDriftBM)
    throw input_error("ci: change-point interval needs an argmax-law table");
  if (fit.vartheta_hat == 0.0)
    throw numeric_error("ci: vartheta_hat = 0, no detectable change");

  const double theta_tilde = theta_tilde_value(fit, mode);
  const double scale =
      2.0 * theta_tilde * theta_tilde /
      (static_cast<double>(fit.n) * fit.vartheta_hat * fit.vartheta_hat);
  const double q_lo = table.quantile((1.0 - coverage) / 2.0);
  const double q_hi = table.quantile((1.0 + coverage) / 2.0);

  IntervalEstimate interval;
  interval.target = IntervalTarget::Tau0;
  interval.lower = std::clamp(fit.tau_hat - q_hi * scale, 0.0, 1.0);
  interval.upper = std::clamp(fit.tau_hat - q_lo * scale, 0.0, 1.0);
  interval.coverage = coverage;
  interval.method = "argmax_drift_bm:" + theta_tilde_mode_name(mode);
  return interval;
}

std::pair<IntervalEstimate, IntervalEstimate> ci_thetas(
    const ChangePointFit& fit, double coverage) {
  if (!(coverage > 0.0 && coverage < 1.0))
    throw input_error("ci: coverage must lie in (0,1)");
  if (!(fit.tau_hat > 0.0 && fit.tau_hat < 1.0))
    throw input_error("ci: degenerate tau_hat");

  const double z = normal_quantile((1.0 + coverage) / 2.0);
  const double nd = static_cast<double>(fit.n);
  const double hw1 =
      z * std::sqrt(2.0) * fit.theta1_hat / std::sqrt(nd * fit.tau_hat);
  const double hw2 = z * std::sqrt(2.0) * fit.theta2_hat /
                     std::sqrt(nd * (1.0 - fit.tau_hat));

  IntervalEstimate ci1{IntervalTarget::Theta1, fit.theta1_hat - hw1,
                       fit.theta1_hat + hw1, coverage, "normal"};
  IntervalEstimate ci2{IntervalTarget::Theta2, fit.theta2_hat - hw2,
                       fit.theta2_hat + hw2, coverage, "normal"};
  return {ci1, ci2};
}

}  // namespace volcp
