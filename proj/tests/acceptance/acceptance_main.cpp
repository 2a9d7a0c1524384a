// Acceptance suite: end-to-end statistical checks of the estimator, the
// test, the intervals and the CLI, each printed as one pass/fail line.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support/kolmogorov.hpp"
#include "volcp/errors.hpp"
#include "volcp/io.hpp"
#include "volcp/parallel.hpp"
#include "volcp/rng.hpp"
#include "volcp/stats.hpp"

namespace fs = std::filesystem;
using namespace volcp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(const std::string& name, const Outcome& outcome, double seconds) {
  std::printf("[%s] %s (%s) [%.1fs]\n", outcome.pass ? "PASS" : "FAIL",
              name.c_str(), outcome.detail.c_str(), seconds);
  std::fflush(stdout);
  if (!outcome.pass) ++g_failures;
}

void run(const std::string& name, const std::function<Outcome()>& criterion) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = criterion();
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(name, outcome, seconds);
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Exact algebra: U_k^2 identity against the brute-force objective, and
//    the argmin/argmax equivalences, on 1000 random series.
Outcome criterion_identities() {
  Xoshiro256pp rng(101);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 198);
    const double s1 = 0.3 + 2.0 * rng.uniform01();
    const double s2 = (rng.uniform01() < 0.5) ? s1 : 0.3 + 2.0 * rng.uniform01();
    const std::size_t split = 1 + static_cast<std::size_t>(rng.uniform01() * (n - 1));
    ResidualSeries res;
    res.delta = 1.0;
    res.z.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      res.z[i] = (i < split ? s1 : s2) * rng.gaussian();

    const CusumTrace trace = cusum_stats(res);
    double scale = 0.0;
    for (double z : res.z) {
      const double c = z * z - trace.z_bar;
      scale += c * c;
    }
    if (scale <= 0.0) scale = 1e-12;

    std::size_t argmax_d = 1, argmax_kv = 1, argmin_u2_fast = 1, argmin_u2_brute = 1;
    double best_d = -1.0, best_kv = -1.0, best_fast = 0.0, best_brute = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double brute = objective_u2(res, k);
      worst_rel = std::max(worst_rel,
                           std::fabs(trace.u2_at(k) - brute) / scale);
      if (std::fabs(trace.u2_at(k) - brute) > 1e-10 * scale)
        return {false, "identity violated at n=" + std::to_string(n) +
                           " k=" + std::to_string(k)};
      const double ad = std::fabs(trace.d_at(k));
      const double kv =
          std::sqrt(static_cast<double>(k) * static_cast<double>(n - k)) *
          std::fabs(trace.v_at(k));
      if (ad > best_d) { best_d = ad; argmax_d = k; }
      if (kv > best_kv) { best_kv = kv; argmax_kv = k; }
      if (k == 1 || trace.u2_at(k) < best_fast) { best_fast = trace.u2_at(k); argmin_u2_fast = k; }
      if (k == 1 || brute < best_brute) { best_brute = brute; argmin_u2_brute = k; }
    }
    if (argmax_d != argmax_kv || argmax_d != argmin_u2_fast ||
        argmax_d != argmin_u2_brute)
      return {false, "argmin/argmax equivalence violated at trial " +
                         std::to_string(trial)};
  }
  return {true, "1000 series, worst rel id error " + fmt(worst_rel)};
}

// ---------------------------------------------------------------------------
// 2. H0 law: sqrt(n/2) max |D_k| matches the trimmed bridge supremum, and
//    the test holds its size.
Outcome criterion_h0_law() {
  constexpr double kTrim = 0.05;

  ExperimentConfig cfg;
  cfg.model = registry_model("bm");
  cfg.model.theta1 = 1.0;
  cfg.model.theta2 = 1.0;
  cfg.model.tau0 = 0.5;
  cfg.model.n = 5000;
  cfg.model.t_horizon = 1.0;
  cfg.replications = 2000;
  cfg.seed = 20101;
  cfg.trim_delta = kTrim;
  const McSummary summary = run_replications(cfg);
  std::vector<double> stats;
  stats.reserve(cfg.replications);
  for (const McRecord& rec : summary.records) stats.push_back(*rec.stat_d);

  // Trimmed bridge sups, simulated directly on a grid of the same
  // resolution as the statistic.
  const std::size_t m = 5000;
  const std::size_t j_lo = 250, j_hi = 4750;
  std::vector<double> bridge_sups(2000);
  parallel_for(bridge_sups.size(), [&](std::size_t p) {
    Xoshiro256pp rng(derive_seed(77702, p));
    std::vector<double> w(m + 1);
    const double sqrt_dt = std::sqrt(1.0 / static_cast<double>(m));
    for (std::size_t j = 1; j <= m; ++j)
      w[j] = w[j - 1] + sqrt_dt * rng.gaussian();
    double sup = 0.0;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(m);
      sup = std::max(sup, std::fabs(w[j] - t * w[m]));
    }
    bridge_sups[p] = sup;
  });

  const double ks = ks_distance(stats, bridge_sups);

  McConfig mc;
  mc.paths = 20000;
  mc.grid = 5000;
  mc.seed = 90210;
  const QuantileTable table = simulate_bridge_sup(kTrim, false, mc);
  const double cv = table.quantile(0.95);
  double rejections = 0.0;
  for (double s : stats)
    if (s > cv) rejections += 1.0;
  const double size = rejections / static_cast<double>(stats.size());

  const bool pass = ks < 0.05 && size >= 0.03 && size <= 0.07;
  return {pass, "KS " + fmt(ks) + " (<0.05), size " + fmt(size) +
                    " (in [0.03,0.07])"};
}

// ---------------------------------------------------------------------------
// 3. Kolmogorov oracle: the simulated untrimmed sup-|bridge| 95% quantile
//    against the series expansion.
Outcome criterion_kolmogorov() {
  const double oracle = test_support::kolmogorov_quantile(0.95);
  McConfig mc;
  mc.paths = 20000;
  mc.grid = 8192;
  mc.seed = 5150;
  const QuantileTable table = simulate_bridge_sup(0.0, false, mc);
  const double q = table.quantile(0.95);
  const bool pass =
      std::fabs(q - oracle) <= 0.02 && std::fabs(oracle - 1.3581) < 5e-4;
  return {pass, "simulated " + fmt(q) + " vs series " + fmt(oracle) +
                    " (tol 0.02)"};
}

// ---------------------------------------------------------------------------
// 4. Convergence rate of the location estimator across an n-schedule.
Outcome criterion_rate() {
  std::vector<McSummary> summaries;
  for (std::size_t n : {500u, 2000u, 8000u}) {
    ExperimentConfig cfg;
    cfg.model = registry_model("bm");
    cfg.model.theta1 = 1.0;
    cfg.model.theta2 = 2.0;
    cfg.model.tau0 = 0.5;
    cfg.model.n = n;
    cfg.model.t_horizon = 1.0;
    cfg.replications = 200;
    cfg.seed = 40000 + n;
    cfg.want_statistics = false;
    summaries.push_back(run_replications(cfg));
  }
  const RateReport rate = rate_check(summaries);

  int monotone_violations = 0;
  for (std::size_t i = 1; i < summaries.size(); ++i)
    if (summaries[i].aggregates.median_abs_tau_error >
        summaries[i - 1].aggregates.median_abs_tau_error)
      ++monotone_violations;

  const bool pass = rate.slope <= -0.8 && monotone_violations <= 1;
  std::string detail = "slope " + fmt(rate.slope) + " (<= -0.8), medians";
  for (const McSummary& s : summaries)
    detail += " " + fmt(s.aggregates.median_abs_tau_error);
  return {pass, detail};
}

// Shared run for criteria 5 and 6.
const McSummary& coverage_run() {
  static const McSummary summary = [] {
    McConfig mc;
    mc.paths = 20000;
    mc.horizon = 50.0;
    mc.step = 0.02;
    mc.seed = 314159;
    McTables tables;
    tables.argmax = simulate_argmax_law(mc);

    ExperimentConfig cfg;
    cfg.model = registry_model("bm");
    cfg.model.theta1 = 1.0;
    cfg.model.theta2 = 1.5;
    cfg.model.tau0 = 0.5;
    cfg.model.n = 10000;
    cfg.model.t_horizon = 1.0;
    cfg.replications = 500;
    cfg.seed = 50505;
    cfg.want_statistics = false;
    cfg.want_tau_ci = true;
    cfg.want_theta_ci = true;
    cfg.tau_coverage = 0.9;
    cfg.theta_coverage = 0.95;
    return run_replications(cfg, tables);
  }();
  return summary;
}

// ---------------------------------------------------------------------------
// 5. Coverage of the argmax-law interval for tau0.
Outcome criterion_tau_coverage() {
  const McSummary& summary = coverage_run();
  const double coverage = *summary.aggregates.tau_ci_coverage;
  const bool pass = coverage >= 0.85 && coverage <= 0.95;
  return {pass, "90% interval covered " + fmt(coverage) + " (in [0.85,0.95])"};
}

// ---------------------------------------------------------------------------
// 6. Asymptotic normality of the volatility estimators.
Outcome criterion_theta_normality() {
  const McSummary& summary = coverage_run();
  const double var1 = *summary.aggregates.var_sqrtn_theta1_error;
  const double expected = 2.0 * 1.0 * 1.0 / 0.5;  // 2 theta1^2 / tau0
  const double cov1 = *summary.aggregates.theta1_ci_coverage;
  const double cov2 = *summary.aggregates.theta2_ci_coverage;
  const bool var_ok = std::fabs(var1 - expected) <= 0.15 * expected;
  const bool cov_ok = cov1 >= 0.92 && cov1 <= 0.98 && cov2 >= 0.92 && cov2 <= 0.98;
  return {var_ok && cov_ok,
          "var " + fmt(var1) + " vs " + fmt(expected) + " (+-15%), coverage " +
              fmt(cov1) + "/" + fmt(cov2) + " (in [0.92,0.98])"};
}

// ---------------------------------------------------------------------------
// 7. Unknown drift: the nonparametric pipeline matches the known-drift one.
Outcome criterion_unknown_drift() {
  ExperimentConfig known;
  known.model = registry_model("ou");
  known.model.theta1 = 1.0;
  known.model.theta2 = 2.0;
  known.model.tau0 = 0.3;
  known.model.n = 5000;
  known.model.t_horizon = 5.0;
  known.replications = 200;
  known.seed = 70707;
  known.want_statistics = false;

  ExperimentConfig estimated = known;
  estimated.drift_mode = ResidualMode::EstimatedDrift;
  estimated.want_dv_at_k0 = true;

  const McSummary known_run = run_replications(known);
  const McSummary estimated_run = run_replications(estimated);

  const double med_known = known_run.aggregates.median_abs_tau_error;
  const double med_est = estimated_run.aggregates.median_abs_tau_error;

  std::vector<double> abs_dv;
  for (const McRecord& rec : estimated_run.records)
    abs_dv.push_back(std::fabs(*rec.sqrtn_dv_at_k0));
  const double q95 = quantile_of(std::move(abs_dv), 0.95);

  const bool pass = med_est <= 2.0 * med_known && q95 < 0.5;
  return {pass, "medians est " + fmt(med_est) + " vs known " + fmt(med_known) +
                    " (ratio<=2), q95 |sqrt(n) dV| " + fmt(q95) + " (<0.5)"};
}

// ---------------------------------------------------------------------------
// 8. CLI determinism: byte-identical outputs for 1 vs 3 workers.
Outcome criterion_cli_determinism(const std::string& cli) {
  if (cli.empty())
    return {false, "no --cli path supplied"};

  const fs::path work = fs::temp_directory_path() / "volcp_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::string exp_file = (work / "exp.json").string();
  {
    ExperimentConfig cfg;
    cfg.model = registry_model("bm");
    cfg.model.theta1 = 1.0;
    cfg.model.theta2 = 2.0;
    cfg.model.tau0 = 0.4;
    cfg.model.n = 600;
    cfg.model.t_horizon = 1.0;
    cfg.replications = 24;
    cfg.seed = 808;
    cfg.want_theta_ci = true;
    std::ofstream out(exp_file);
    out << to_json(cfg).dump(2) << "\n";
  }

  auto shell = [&](const std::string& command) {
    const int rc = std::system(command.c_str());
    if (rc != 0) throw numeric_error("command failed: " + command);
  };
  auto bytes = [&](const fs::path& file) { return read_text_file(file.string()); };
  const std::string q = "'" + cli + "'";

  // Replication engine, 1 vs 3 workers.
  shell("VOLCP_WORKERS=1 " + q + " mc --config '" + exp_file + "' --out '" +
        (work / "mc1.json").string() + "' --records-csv '" +
        (work / "rec1.csv").string() + "'");
  shell("VOLCP_WORKERS=3 " + q + " mc --config '" + exp_file + "' --out '" +
        (work / "mc3.json").string() + "' --records-csv '" +
        (work / "rec3.csv").string() + "'");
  if (bytes(work / "mc1.json") != bytes(work / "mc3.json"))
    return {false, "mc summaries differ across worker counts"};
  if (bytes(work / "rec1.csv") != bytes(work / "rec3.csv"))
    return {false, "mc records differ across worker counts"};

  // Table simulation, 1 vs 2 workers.
  const std::string crit_args =
      " critvals --target bridge --trim 0.05 --paths 2000 --grid 1000 "
      "--seed 5 --out ";
  shell("VOLCP_WORKERS=1 " + q + crit_args + "'" + (work / "cv1.json").string() + "'");
  shell("VOLCP_WORKERS=2 " + q + crit_args + "'" + (work / "cv2.json").string() + "'");
  if (bytes(work / "cv1.json") != bytes(work / "cv2.json"))
    return {false, "quantile tables differ across worker counts"};

  // Simulate/detect chain run twice end to end.
  for (int round = 1; round <= 2; ++round) {
    const std::string tag = std::to_string(round);
    shell(q + " simulate --model ou --theta1 1 --theta2 3 --tau0 0.6 --n 1500 "
            "--t-horizon 3 --seed 2024 --out '" +
          (work / ("path" + tag + ".csv")).string() + "'");
    shell(q + " detect --in '" + (work / ("path" + tag + ".csv")).string() +
          "' --drift known --b 'ou:kappa=1,mu=0' --sigma one --out '" +
          (work / ("fit" + tag + ".json")).string() + "'");
  }
  if (bytes(work / "path1.csv") != bytes(work / "path2.csv"))
    return {false, "simulated paths differ across runs"};
  if (bytes(work / "fit1.json") != bytes(work / "fit2.json"))
    return {false, "fits differ across runs"};

  fs::remove_all(work);
  return {true, "mc, critvals and simulate/detect byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

  run("1. exact algebra: U_k^2 identity and argmax equivalences",
      criterion_identities);
  run("2. H0 limit law and test size", criterion_h0_law);
  run("3. Kolmogorov series oracle for the untrimmed bridge sup",
      criterion_kolmogorov);
  run("4. location-error rate across the n-schedule", criterion_rate);
  run("5. argmax-law interval coverage for tau0", criterion_tau_coverage);
  run("6. normality and interval coverage for theta", criterion_theta_normality);
  run("7. nonparametric-drift pipeline matches the known-drift one",
      criterion_unknown_drift);
  run("8. CLI determinism across worker counts",
      [&] { return criterion_cli_determinism(cli); });

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
