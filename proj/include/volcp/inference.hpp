#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "volcp/changepoint.hpp"

namespace volcp {

// Limit laws whose quantiles are obtained by simulation:
//   BridgeSup          sup_{[d,1-d]} |W0(t)|, the H0 law of sqrt(n/2) max|D_k|
//   WeightedBridgeSup  sup_{[d,1-d]} (t(1-t))^{-1/2} |W0(t)|, for max|V_k|
//   ArgmaxDriftBM      argmax_v { W(v) - |v|/2 }, W a two-sided BM
enum class LimitLaw { BridgeSup, WeightedBridgeSup, ArgmaxDriftBM };

std::string limit_law_name(LimitLaw law);
LimitLaw limit_law_from_name(const std::string& name);

struct McConfig {
  std::size_t paths = 10000;  // M
  std::size_t grid = 2000;    // m, bridge targets only
  double horizon = 50.0;      // V, argmax target only
  double step = 0.01;         // h, argmax target only
  std::uint64_t seed = 0;
};

struct QuantileTable {
  LimitLaw target = LimitLaw::BridgeSup;
  double trim_delta = 0.0;  // bridge targets only
  McConfig mc;
  std::vector<double> probabilities;  // ascending, in (0,1)
  std::vector<double> quantiles;      // nondecreasing
  double boundary_hit_fraction = 0.0;  // argmax target only

  // Linear interpolation between tabulated probabilities; throws outside
  // the tabulated range.
  double quantile(double p) const;
};

// Dense default grid: 0.001, 0.002, ..., 0.999.
std::vector<double> default_probability_grid();

struct H0Stats {
  double stat_d = 0.0;  // sqrt(n/2) max |D_k| over the trimmed range
  double stat_v = 0.0;  // sqrt(n/2) max |V_k| / theta_tilde
};

// theta_tilde studentizes the V statistic so that it is pivotal for any
// volatility level; with theta = 1 it reduces to the plain statistic.
H0Stats h0_statistics(const CusumTrace& trace, double trim_delta,
                      double theta_tilde);

// Simulates a Brownian bridge W0(t) = W(t) - t W(1) on an m-point grid and
// tabulates the (optionally weighted) trimmed supremum of |W0|.
// Path p draws from the stream derive_seed(mc.seed, p), so the table is
// identical for any parallel schedule.
QuantileTable simulate_bridge_sup(double trim_delta, bool weighted,
                                  const McConfig& mc);

// Simulates argmax_v { W(v) - |v|/2 } on [-V, V] with step h via two
// independent random walks glued at 0. boundary_hit_fraction records how
// often the argmax landed on +-V; above 0.1% the horizon is too small.
QuantileTable simulate_argmax_law(const McConfig& mc);

enum class TestStatistic { D, V };

struct TestReport {
  double stat_d = 0.0;
  double stat_v = 0.0;
  TestStatistic statistic_used = TestStatistic::D;
  double trim_delta = 0.0;
  double alpha = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  // Critical-value provenance.
  LimitLaw cv_target = LimitLaw::BridgeSup;
  McConfig cv_mc;
};

// Rejects when the statistic matching the table's law exceeds the 1-alpha
// quantile. The table must target BridgeSup (D statistic) or
// WeightedBridgeSup (V statistic) at the same trim.
TestReport test_no_change(const CusumTrace& trace, double trim_delta,
                          double alpha, const QuantileTable& table);

enum class IntervalTarget { Tau0, Theta1, Theta2 };

struct IntervalEstimate {
  IntervalTarget target = IntervalTarget::Tau0;
  double lower = 0.0;
  double upper = 0.0;
  double coverage = 0.0;
  std::string method;
};

// Which consistent estimate stands in for the limiting theta in the
// change-point interval scaling.
enum class ThetaTildeMode { Pooled, Theta1, Theta2 };

std::string theta_tilde_mode_name(ThetaTildeMode mode);
ThetaTildeMode theta_tilde_mode_from_name(const std::string& name);

double theta_tilde_value(const ChangePointFit& fit, ThetaTildeMode mode);

// Inverts n vartheta^2 (tau_hat - tau0) / (2 theta_tilde^2) => argmax law:
//   [tau_hat - q_hi c, tau_hat - q_lo c],  c = 2 theta_tilde^2 / (n vartheta^2),
// clipped to (0,1). Throws when vartheta_hat = 0 (no detectable change).
IntervalEstimate ci_changepoint(const ChangePointFit& fit, double coverage,
                                const QuantileTable& table,
                                ThetaTildeMode mode = ThetaTildeMode::Pooled);

// Normal-theory intervals theta_hat +- z sqrt(2) theta_hat / sqrt(n tau)
// from the asymptotic variances 2 theta^2/tau0 and 2 theta^2/(1-tau0).
std::pair<IntervalEstimate, IntervalEstimate> ci_thetas(
    const ChangePointFit& fit, double coverage);

}  // namespace volcp
