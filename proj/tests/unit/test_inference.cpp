#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/kolmogorov.hpp"
#include "volcp/errors.hpp"
#include "volcp/inference.hpp"

using namespace volcp;

namespace {

ResidualSeries series_from(std::vector<double> z) {
  ResidualSeries res;
  res.z = std::move(z);
  res.delta = 1.0;
  return res;
}

// A synthetic symmetric argmax table with quantiles linear in p.
QuantileTable linear_argmax_table(double half_range) {
  QuantileTable table;
  table.target = LimitLaw::ArgmaxDriftBM;
  table.probabilities = default_probability_grid();
  for (double p : table.probabilities)
    table.quantiles.push_back(half_range * (2.0 * p - 1.0));
  return table;
}

}  // namespace

TEST_CASE("H0 statistics on the hand-worked series") {
  const CusumTrace trace = cusum_stats(series_from({1.0, 1.0, 2.0, 2.0}));
  const H0Stats stats = h0_statistics(trace, 0.0, 2.5);
  CHECK(stats.stat_d == doctest::Approx(std::sqrt(2.0) * 0.30).epsilon(1e-12));
  CHECK(stats.stat_v == doctest::Approx(std::sqrt(2.0) * 1.5 / 2.5).epsilon(1e-12));
}

TEST_CASE("H0 statistics vanish on constant squared residuals") {
  const CusumTrace trace = cusum_stats(series_from({1.0, -1.0, 1.0, -1.0}));
  const H0Stats stats = h0_statistics(trace, 0.0, trace.z_bar);
  CHECK(stats.stat_d == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(stats.stat_v == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
}

TEST_CASE("studentized statistic is scale invariant") {
  ResidualSeries res = series_from({0.4, -1.1, 2.0, 0.3, -0.7, 1.4, -0.2});
  const CusumTrace trace = cusum_stats(res);
  const H0Stats base = h0_statistics(trace, 0.0, trace.z_bar);
  for (double& z : res.z) z *= 2.0;
  const CusumTrace scaled = cusum_stats(res);
  const H0Stats after = h0_statistics(scaled, 0.0, scaled.z_bar);
  CHECK(after.stat_v == doctest::Approx(base.stat_v).epsilon(1e-13));
  CHECK(after.stat_d == doctest::Approx(base.stat_d).epsilon(1e-13));
}

TEST_CASE("quantile table interpolation") {
  QuantileTable table = linear_argmax_table(10.0);
  CHECK(table.quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(table.quantile(0.975) == doctest::Approx(9.5).epsilon(1e-12));
  CHECK(table.quantile(0.0255) == doctest::Approx(-9.49).epsilon(1e-9));
  CHECK_THROWS_AS(table.quantile(0.0001), input_error);
  CHECK_THROWS_AS(table.quantile(0.9999), input_error);
}

TEST_CASE("bridge supremum simulation approaches the Kolmogorov law") {
  McConfig mc;
  mc.paths = 4000;
  mc.grid = 2000;
  mc.seed = 7;
  const QuantileTable table = simulate_bridge_sup(0.0, false, mc);
  const double oracle = test_support::kolmogorov_quantile(0.95);
  CHECK(oracle == doctest::Approx(1.3581).epsilon(2e-4));
  CHECK(table.quantile(0.95) == doctest::Approx(oracle).epsilon(0.05));

  // Quantiles are nondecreasing in p.
  for (std::size_t i = 1; i < table.quantiles.size(); ++i)
    CHECK(table.quantiles[i] >= table.quantiles[i - 1]);
}

TEST_CASE("weighted supremum dominates the unweighted one") {
  McConfig mc;
  mc.paths = 2000;
  mc.grid = 1000;
  mc.seed = 8;
  const QuantileTable plain = simulate_bridge_sup(0.05, false, mc);
  const QuantileTable weighted = simulate_bridge_sup(0.05, true, mc);
  for (double p : {0.25, 0.5, 0.9, 0.95})
    CHECK(weighted.quantile(p) >= plain.quantile(p));
}

TEST_CASE("bridge simulation is deterministic and config-checked") {
  McConfig mc;
  mc.paths = 1000;
  mc.grid = 1000;
  mc.seed = 12;
  const QuantileTable a = simulate_bridge_sup(0.05, false, mc);
  const QuantileTable b = simulate_bridge_sup(0.05, false, mc);
  CHECK(a.quantiles == b.quantiles);

  McConfig bad = mc;
  bad.paths = 10;
  CHECK_THROWS_AS(simulate_bridge_sup(0.05, false, bad), input_error);
  bad = mc;
  bad.grid = 10;
  CHECK_THROWS_AS(simulate_bridge_sup(0.05, false, bad), input_error);
  CHECK_THROWS_AS(simulate_bridge_sup(0.6, false, mc), input_error);
}

TEST_CASE("doubling the path count moves quantiles within MC error") {
  McConfig mc;
  mc.paths = 4000;
  mc.grid = 1000;
  mc.seed = 3;
  const QuantileTable base = simulate_bridge_sup(0.05, false, mc);
  McConfig doubled = mc;
  doubled.paths = 8000;
  const QuantileTable big = simulate_bridge_sup(0.05, false, doubled);
  for (double p : {0.5, 0.9, 0.95}) {
    // Binomial standard error propagated through the empirical quantile:
    // se(q) = sqrt(p(1-p)/M) / density, density by finite differences.
    const double eps = 0.01;
    const double density =
        (base.quantile(p + eps) - base.quantile(p - eps)) / (2.0 * eps);
    const double se =
        std::sqrt(p * (1.0 - p) / static_cast<double>(mc.paths)) / density;
    CHECK(std::fabs(big.quantile(p) - base.quantile(p)) < 3.0 * se);
  }
}

TEST_CASE("argmax law simulation") {
  McConfig mc;
  mc.paths = 4000;
  mc.horizon = 40.0;
  mc.step = 0.05;
  mc.seed = 9;
  const QuantileTable table = simulate_argmax_law(mc);

  CHECK(table.boundary_hit_fraction <= 0.001);
  CHECK(std::fabs(table.quantile(0.5)) < 1.0);
  for (double p : {0.75, 0.9, 0.95}) {
    CHECK(table.quantile(p) > 0.0);
    // Symmetry of the limit law within loose MC tolerance.
    CHECK(table.quantile(p) + table.quantile(1.0 - p) ==
          doctest::Approx(0.0).scale(table.quantile(p)).epsilon(0.35));
  }
  // Probability mass of [-a, a] grows with a.
  auto mass_within = [&](double a) {
    double count = 0.0;
    for (std::size_t i = 0; i < table.probabilities.size(); ++i)
      if (std::fabs(table.quantiles[i]) <= a) count += 1.0;
    return count;
  };
  CHECK(mass_within(2.0) < mass_within(8.0));
  CHECK(mass_within(8.0) < mass_within(30.0));

  McConfig bad = mc;
  bad.horizon = 10.0;
  CHECK_THROWS_AS(simulate_argmax_law(bad), input_error);
  bad = mc;
  bad.step = 1.0;
  CHECK_THROWS_AS(simulate_argmax_law(bad), input_error);
}

TEST_CASE("no-change test basics") {
  McConfig mc;
  mc.paths = 2000;
  mc.grid = 1000;
  mc.seed = 5;
  const QuantileTable table = simulate_bridge_sup(0.05, false, mc);

  // Constant squared residuals never reject.
  const CusumTrace flat = cusum_stats(series_from({1.0, -1.0, 1.0, -1.0, 1.0,
                                                   -1.0, 1.0, -1.0, 1.0, -1.0,
                                                   1.0, -1.0, 1.0, -1.0, 1.0,
                                                   -1.0, 1.0, -1.0, 1.0, -1.0}));
  for (double alpha : {0.01, 0.05, 0.2, 0.5}) {
    const TestReport report = test_no_change(flat, 0.05, alpha, table);
    CHECK_FALSE(report.reject);
    CHECK(report.statistic_used == TestStatistic::D);
    CHECK(report.critical_value == doctest::Approx(table.quantile(1.0 - alpha)));
  }

  // Table/request mismatches.
  CHECK_THROWS_AS(test_no_change(flat, 0.10, 0.05, table), input_error);
  const QuantileTable argmax_table = linear_argmax_table(5.0);
  CHECK_THROWS_AS(test_no_change(flat, 0.05, 0.05, argmax_table), input_error);
  CHECK_THROWS_AS(test_no_change(flat, 0.05, 1.5, table), input_error);

  // The weighted table drives the V statistic.
  const QuantileTable wtable = simulate_bridge_sup(0.05, true, mc);
  const TestReport wreport = test_no_change(flat, 0.05, 0.05, wtable);
  CHECK(wreport.statistic_used == TestStatistic::V);
  CHECK_FALSE(wreport.reject);
}

TEST_CASE("change-point interval inverts the argmax law") {
  ChangePointFit fit;
  fit.n = 1000;
  fit.k_hat = 400;
  fit.tau_hat = 0.4;
  fit.theta1_hat = 1.0;
  fit.theta2_hat = 2.0;
  fit.vartheta_hat = 1.0;
  fit.z_bar = 0.4 * 1.0 + 0.6 * 2.0;

  const QuantileTable table = linear_argmax_table(10.0);
  const IntervalEstimate ci = ci_changepoint(fit, 0.9, table, ThetaTildeMode::Theta1);
  // Symmetric table: interval symmetric about tau_hat.
  CHECK(ci.upper - fit.tau_hat == doctest::Approx(fit.tau_hat - ci.lower).epsilon(1e-12));
  const double expected_halfwidth = 9.0 * 2.0 * 1.0 / 1000.0;
  CHECK(ci.upper - ci.lower == doctest::Approx(2.0 * expected_halfwidth).epsilon(1e-12));

  // Width scales as 1/n.
  ChangePointFit big = fit;
  big.n = 2000;
  const IntervalEstimate ci2 = ci_changepoint(big, 0.9, table, ThetaTildeMode::Theta1);
  CHECK(ci2.upper - ci2.lower ==
        doctest::Approx(0.5 * (ci.upper - ci.lower)).epsilon(1e-12));

  // Clipping keeps the interval inside [0, 1].
  ChangePointFit tiny = fit;
  tiny.n = 10;
  const IntervalEstimate clipped =
      ci_changepoint(tiny, 0.9, table, ThetaTildeMode::Theta1);
  CHECK(clipped.lower >= 0.0);
  CHECK(clipped.upper <= 1.0);

  ChangePointFit flat = fit;
  flat.vartheta_hat = 0.0;
  CHECK_THROWS_AS(ci_changepoint(flat, 0.9, table), numeric_error);

  McConfig mc;
  mc.paths = 2000;
  mc.grid = 1000;
  mc.seed = 5;
  const QuantileTable bridge = simulate_bridge_sup(0.05, false, mc);
  CHECK_THROWS_AS(ci_changepoint(fit, 0.9, bridge), input_error);
}

TEST_CASE("theta-tilde selection") {
  ChangePointFit fit;
  fit.theta1_hat = 1.0;
  fit.theta2_hat = 3.0;
  fit.z_bar = 2.2;
  CHECK(theta_tilde_value(fit, ThetaTildeMode::Pooled) == 2.2);
  CHECK(theta_tilde_value(fit, ThetaTildeMode::Theta1) == 1.0);
  CHECK(theta_tilde_value(fit, ThetaTildeMode::Theta2) == 3.0);
  CHECK(theta_tilde_mode_from_name("pooled") == ThetaTildeMode::Pooled);
  CHECK_THROWS_AS(theta_tilde_mode_from_name("median"), input_error);
}

TEST_CASE("theta intervals match the closed form") {
  ChangePointFit fit;
  fit.n = 200;
  fit.k_hat = 100;
  fit.tau_hat = 0.5;
  fit.theta1_hat = 1.0;
  fit.theta2_hat = 1.0;
  fit.vartheta_hat = 0.0;
  const auto [ci1, ci2] = ci_thetas(fit, 0.95);
  CHECK(ci1.upper - ci1.lower == doctest::Approx(2.0 * 0.27718).epsilon(1e-4));
  CHECK(ci1.target == IntervalTarget::Theta1);
  CHECK(ci2.target == IntervalTarget::Theta2);
  CHECK(ci1.lower == doctest::Approx(1.0 - 0.27718).epsilon(1e-4));

  // Coverage toward zero collapses the width.
  const auto [narrow1, narrow2] = ci_thetas(fit, 1e-6);
  CHECK(narrow1.upper - narrow1.lower < 1e-5);
  CHECK(narrow2.upper - narrow2.lower < 1e-5);

  ChangePointFit degenerate = fit;
  degenerate.tau_hat = 0.0;
  CHECK_THROWS_AS(ci_thetas(degenerate, 0.95), input_error);
  CHECK_THROWS_AS(ci_thetas(fit, 0.0), input_error);
}
