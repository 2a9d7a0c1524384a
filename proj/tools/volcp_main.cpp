#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "volcp/errors.hpp"
#include "volcp/io.hpp"

namespace {

using volcp::ojson;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

void emit(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text;
  } else {
    volcp::write_text_file(out_file, text);
  }
}

void emit_json(const ojson& j, const std::string& out_file) {
  emit(j.dump(2) + "\n", out_file);
}

// Options shared by every subcommand that reads a path CSV and builds
// residuals from it.
struct PipelineOptions {
  std::string in_file;
  double delta = 0.0;  // 0 means: infer from the time column
  std::string drift_mode = "known";
  std::string b_spec = "zero";
  std::string sigma_spec = "one";
  std::string kernel = "gaussian";
  double bandwidth = 0.0;  // 0 means: Silverman rule
  double trim = 0.05;
};

void add_pipeline_options(CLI::App* cmd, PipelineOptions& opt) {
  cmd->add_option("--in", opt.in_file, "input CSV (columns t,x or x)")
      ->required();
  cmd->add_option("--delta", opt.delta,
                  "step size for value-only files (otherwise inferred)");
  cmd->add_option("--drift", opt.drift_mode, "residual mode: known | estimate")
      ->check(CLI::IsMember({"known", "estimate"}))
      ->capture_default_str();
  cmd->add_option("--b", opt.b_spec, "drift coefficient (known mode)")
      ->capture_default_str();
  cmd->add_option("--sigma", opt.sigma_spec, "diffusion coefficient (known mode)")
      ->capture_default_str();
  cmd->add_option("--kernel", opt.kernel, "kernel for estimated drift")
      ->check(CLI::IsMember({"gaussian", "epanechnikov"}))
      ->capture_default_str();
  cmd->add_option("--bandwidth", opt.bandwidth,
                  "bandwidth override for estimated drift (default Silverman)");
  cmd->add_option("--delta-trim,--trim", opt.trim, "search/test trim delta")
      ->capture_default_str();
}

struct Pipeline {
  volcp::SamplePath path;
  volcp::ResidualSeries residuals;
  volcp::CusumTrace trace;
  ojson echo;
};

Pipeline run_pipeline(const PipelineOptions& opt) {
  Pipeline pipe;
  volcp::CsvSpec csv;
  if (opt.delta > 0.0) csv.delta_override = opt.delta;
  pipe.path = volcp::load_csv_file(opt.in_file, csv);

  if (opt.drift_mode == "known") {
    pipe.residuals = volcp::residuals_known(
        pipe.path, volcp::make_coefficient(opt.b_spec),
        volcp::make_coefficient(opt.sigma_spec));
  } else {
    const volcp::Kernel kernel = volcp::kernel_from_name(opt.kernel);
    const double h =
        opt.bandwidth > 0.0
            ? opt.bandwidth
            : volcp::silverman_bandwidth(std::vector<double>(
                  pipe.path.values.begin(), pipe.path.values.end() - 1));
    pipe.residuals =
        volcp::residuals_estimated(pipe.path, volcp::nw_drift(pipe.path, kernel, h));
    pipe.echo["bandwidth"] = h;
    pipe.echo["kernel"] = opt.kernel;
  }
  pipe.trace = volcp::cusum_stats(pipe.residuals);

  pipe.echo["in"] = opt.in_file;
  pipe.echo["delta"] = pipe.path.delta;
  pipe.echo["n"] = pipe.path.steps();
  pipe.echo["drift"] = opt.drift_mode;
  if (opt.drift_mode == "known") {
    pipe.echo["b"] = opt.b_spec;
    pipe.echo["sigma"] = opt.sigma_spec;
  }
  pipe.echo["trim_delta"] = opt.trim;
  return pipe;
}

struct TableOptions {
  std::string table_file;
  std::string cache_dir;
  std::size_t mc_paths = 0;
  std::size_t mc_grid = 5000;
  double horizon = 50.0;
  double step = 0.01;
  std::uint64_t mc_seed = 20240901;
};

void add_table_options(CLI::App* cmd, TableOptions& opt, bool argmax) {
  cmd->add_option("--table", opt.table_file, "quantile table JSON to use");
  cmd->add_option("--cache-dir", opt.cache_dir,
                  "directory for cached quantile tables");
  cmd->add_option("--mc-paths", opt.mc_paths, "simulated paths when no table given");
  if (argmax) {
    cmd->add_option("--horizon", opt.horizon, "argmax-law horizon V")
        ->capture_default_str();
    cmd->add_option("--step", opt.step, "argmax-law grid step h")
        ->capture_default_str();
  } else {
    cmd->add_option("--mc-grid", opt.mc_grid, "bridge grid points")
        ->capture_default_str();
  }
  cmd->add_option("--mc-seed", opt.mc_seed, "seed for table simulation")
      ->capture_default_str();
}

volcp::QuantileTable acquire_table(const TableOptions& opt, volcp::LimitLaw target,
                                   double trim) {
  if (!opt.table_file.empty()) return volcp::load_table(opt.table_file);
  volcp::McConfig mc;
  mc.paths = opt.mc_paths;
  mc.grid = opt.mc_grid;
  mc.horizon = opt.horizon;
  mc.step = opt.step;
  mc.seed = opt.mc_seed;
  if (mc.paths == 0)
    mc.paths = (target == volcp::LimitLaw::ArgmaxDriftBM) ? 100000 : 20000;
  if (!opt.cache_dir.empty())
    return volcp::cached_table(opt.cache_dir, target, trim, mc);
  switch (target) {
    case volcp::LimitLaw::BridgeSup:
      return volcp::simulate_bridge_sup(trim, false, mc);
    case volcp::LimitLaw::WeightedBridgeSup:
      return volcp::simulate_bridge_sup(trim, true, mc);
    case volcp::LimitLaw::ArgmaxDriftBM:
      return volcp::simulate_argmax_law(mc);
  }
  throw volcp::input_error("unreachable table target");
}

int run(int argc, char** argv) {
  CLI::App app{
      "volcp: volatility change-point estimation for discretely observed "
      "diffusions"};
  app.require_subcommand(1);
  // Options may also come from an INI/TOML file with one section per
  // subcommand; unknown keys are rejected.
  app.set_config("--run-config");
  app.allow_config_extras(false);

  // --- simulate -------------------------------------------------------
  auto* sim = app.add_subcommand(
      "simulate", "simulate a diffusion path with a volatility switch");
  std::string sim_model = "bm", sim_b, sim_sigma, sim_out;
  double sim_theta1 = 1.0, sim_theta2 = 1.0, sim_tau0 = 0.5, sim_T = 1.0;
  double sim_x0 = std::numeric_limits<double>::quiet_NaN();
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  sim->add_option("--model", sim_model, "built-in model: bm | ou | geometric")
      ->capture_default_str();
  sim->add_option("--b", sim_b, "drift coefficient override");
  sim->add_option("--sigma", sim_sigma, "diffusion coefficient override");
  sim->add_option("--theta1", sim_theta1, "pre-change volatility multiplier")
      ->capture_default_str();
  sim->add_option("--theta2", sim_theta2, "post-change volatility multiplier")
      ->capture_default_str();
  sim->add_option("--tau0", sim_tau0, "change fraction in (0,1)")
      ->capture_default_str();
  sim->add_option("--n", sim_n, "number of steps")->required();
  sim->add_option("--t-horizon", sim_T, "time horizon T")->capture_default_str();
  sim->add_option("--x0", sim_x0, "initial value (default from model)");
  sim->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV file (default stdout)");

  // --- detect ---------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "estimate the change point");
  PipelineOptions det_opt;
  std::string det_out, det_trace_out;
  add_pipeline_options(detect, det_opt);
  detect->add_option("--out", det_out, "fit report JSON (default stdout)");
  detect->add_option("--trace-out", det_trace_out, "CUSUM trace CSV");

  // --- test -----------------------------------------------------------
  auto* test = app.add_subcommand("test", "test the no-change hypothesis");
  PipelineOptions test_opt;
  TableOptions test_table;
  double test_alpha = 0.05;
  bool test_weighted = false;
  std::string test_out;
  add_pipeline_options(test, test_opt);
  test->add_option("--alpha", test_alpha, "test level")->capture_default_str();
  test->add_flag("--weighted", test_weighted,
                 "use the weighted (V) statistic instead of D");
  add_table_options(test, test_table, false);
  test->add_option("--out", test_out, "test report JSON (default stdout)");

  // --- ci -------------------------------------------------------------
  auto* ci = app.add_subcommand(
      "ci", "confidence intervals for tau0, theta1 and theta2");
  PipelineOptions ci_opt;
  TableOptions ci_table;
  double ci_coverage = 0.95;
  std::string ci_theta_tilde = "pooled", ci_out;
  add_pipeline_options(ci, ci_opt);
  ci->add_option("--coverage", ci_coverage, "nominal coverage")
      ->capture_default_str();
  ci->add_option("--theta-tilde", ci_theta_tilde,
                 "theta estimate in the tau0 interval scaling")
      ->check(CLI::IsMember({"pooled", "theta1", "theta2"}))
      ->capture_default_str();
  add_table_options(ci, ci_table, true);
  ci->add_option("--out", ci_out, "intervals JSON (default stdout)");

  // --- critvals -------------------------------------------------------
  auto* crit = app.add_subcommand(
      "critvals", "simulate and cache limit-law quantile tables");
  std::string crit_target = "bridge", crit_out, crit_cache;
  double crit_trim = 0.05, crit_horizon = 50.0, crit_step = 0.01;
  std::size_t crit_paths = 100000, crit_grid = 5000;
  std::uint64_t crit_seed = 20240901;
  crit->add_option("--target", crit_target,
                   "bridge | weighted-bridge | argmax")
      ->check(CLI::IsMember({"bridge", "weighted-bridge", "argmax"}))
      ->capture_default_str();
  crit->add_option("--delta-trim,--trim", crit_trim, "trim delta (bridge targets)")
      ->capture_default_str();
  crit->add_option("--paths", crit_paths, "Monte Carlo paths")
      ->capture_default_str();
  crit->add_option("--grid", crit_grid, "bridge grid points")
      ->capture_default_str();
  crit->add_option("--horizon", crit_horizon, "argmax horizon V")
      ->capture_default_str();
  crit->add_option("--step", crit_step, "argmax grid step h")
      ->capture_default_str();
  crit->add_option("--seed", crit_seed, "RNG seed")->capture_default_str();
  crit->add_option("--out", crit_out, "table JSON (default stdout)");
  crit->add_option("--cache-dir", crit_cache, "directory for cached tables");

  // --- mc -------------------------------------------------------------
  auto* mc = app.add_subcommand(
      "mc", "run a replication experiment from a JSON config");
  std::string mc_config_file, mc_out, mc_records_csv;
  std::string mc_h0_table, mc_argmax_table;
  mc->add_option("--config", mc_config_file, "experiment config JSON")
      ->required();
  mc->add_option("--out", mc_out, "summary JSON (default stdout)");
  mc->add_option("--records-csv", mc_records_csv,
                 "per-replication records as CSV");
  mc->add_option("--table", mc_h0_table,
                 "H0 quantile table for the test output");
  mc->add_option("--argmax-table", mc_argmax_table,
                 "argmax quantile table for the tau0 interval output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (sim->parsed()) {
    volcp::ModelSpec model = volcp::registry_model(sim_model);
    if (!sim_b.empty()) {
      model.drift_spec = sim_b;
      model.drift = volcp::make_coefficient(sim_b);
    }
    if (!sim_sigma.empty()) {
      model.diffusion_spec = sim_sigma;
      model.diffusion = volcp::make_coefficient(sim_sigma);
    }
    model.theta1 = sim_theta1;
    model.theta2 = sim_theta2;
    model.tau0 = sim_tau0;
    model.n = sim_n;
    model.t_horizon = sim_T;
    if (!std::isnan(sim_x0)) model.x0 = sim_x0;
    const volcp::SamplePath path = volcp::simulate_path(model, sim_seed);
    std::ostringstream csv;
    volcp::write_path_csv(csv, path);
    emit(csv.str(), sim_out);
    return kExitOk;
  }

  if (detect->parsed()) {
    Pipeline pipe = run_pipeline(det_opt);
    const volcp::ChangePointFit fit = volcp::estimate_changepoint(
        pipe.trace, det_opt.trim, pipe.residuals.mode);
    emit_json(volcp::make_report("change_point_fit", volcp::to_json(fit),
                                 pipe.echo),
              det_out);
    if (!det_trace_out.empty()) {
      std::ostringstream csv;
      volcp::write_trace_csv(csv, pipe.trace);
      volcp::write_text_file(det_trace_out, csv.str());
    }
    return kExitOk;
  }

  if (test->parsed()) {
    Pipeline pipe = run_pipeline(test_opt);
    const volcp::LimitLaw target = test_weighted
                                       ? volcp::LimitLaw::WeightedBridgeSup
                                       : volcp::LimitLaw::BridgeSup;
    const volcp::QuantileTable table =
        acquire_table(test_table, target, test_opt.trim);
    const volcp::TestReport report =
        volcp::test_no_change(pipe.trace, test_opt.trim, test_alpha, table);
    pipe.echo["alpha"] = test_alpha;
    pipe.echo["weighted"] = test_weighted;
    emit_json(volcp::make_report("test_report", volcp::to_json(report),
                                 pipe.echo),
              test_out);
    return kExitOk;
  }

  if (ci->parsed()) {
    Pipeline pipe = run_pipeline(ci_opt);
    const volcp::ChangePointFit fit = volcp::estimate_changepoint(
        pipe.trace, ci_opt.trim, pipe.residuals.mode);
    const volcp::QuantileTable table =
        acquire_table(ci_table, volcp::LimitLaw::ArgmaxDriftBM, 0.0);
    if (table.boundary_hit_fraction > 0.001) {
      std::cerr << "warning: " << table.boundary_hit_fraction * 100.0
                << "% of simulated argmaxes hit the horizon; increase it\n";
    }
    const volcp::ThetaTildeMode mode =
        volcp::theta_tilde_mode_from_name(ci_theta_tilde);
    const volcp::IntervalEstimate tau_ci =
        volcp::ci_changepoint(fit, ci_coverage, table, mode);
    const auto [theta1_ci, theta2_ci] = volcp::ci_thetas(fit, ci_coverage);
    pipe.echo["coverage"] = ci_coverage;
    pipe.echo["theta_tilde"] = ci_theta_tilde;
    ojson payload;
    payload["fit"] = volcp::to_json(fit);
    payload["tau0"] = volcp::to_json(tau_ci);
    payload["theta1"] = volcp::to_json(theta1_ci);
    payload["theta2"] = volcp::to_json(theta2_ci);
    emit_json(volcp::make_report("intervals", payload, pipe.echo), ci_out);
    return kExitOk;
  }

  if (crit->parsed()) {
    volcp::LimitLaw target = volcp::LimitLaw::BridgeSup;
    if (crit_target == "weighted-bridge")
      target = volcp::LimitLaw::WeightedBridgeSup;
    if (crit_target == "argmax") target = volcp::LimitLaw::ArgmaxDriftBM;
    volcp::McConfig mc_cfg;
    mc_cfg.paths = crit_paths;
    mc_cfg.grid = crit_grid;
    mc_cfg.horizon = crit_horizon;
    mc_cfg.step = crit_step;
    mc_cfg.seed = crit_seed;
    volcp::QuantileTable table;
    if (!crit_cache.empty()) {
      table = volcp::cached_table(crit_cache, target, crit_trim, mc_cfg);
    } else if (target == volcp::LimitLaw::ArgmaxDriftBM) {
      table = volcp::simulate_argmax_law(mc_cfg);
    } else {
      table = volcp::simulate_bridge_sup(
          crit_trim, target == volcp::LimitLaw::WeightedBridgeSup, mc_cfg);
    }
    if (table.boundary_hit_fraction > 0.001) {
      std::cerr << "warning: " << table.boundary_hit_fraction * 100.0
                << "% of simulated argmaxes hit the horizon; increase it\n";
    }
    emit_json(volcp::make_report("quantile_table", volcp::to_json(table)),
              crit_out);
    return kExitOk;
  }

  if (mc->parsed()) {
    ojson config_json;
    try {
      config_json = ojson::parse(volcp::read_text_file(mc_config_file));
    } catch (const volcp::input_error&) {
      throw;
    } catch (const std::exception& e) {
      throw volcp::input_error(std::string("bad experiment config: ") + e.what());
    }
    const volcp::ExperimentConfig cfg = volcp::experiment_from_json(config_json);
    volcp::McTables tables;
    if (!mc_h0_table.empty()) tables.h0 = volcp::load_table(mc_h0_table);
    if (!mc_argmax_table.empty())
      tables.argmax = volcp::load_table(mc_argmax_table);
    const volcp::McSummary summary = volcp::run_replications(cfg, tables);
    emit_json(volcp::make_report("mc_summary", volcp::to_json(summary)), mc_out);
    if (!mc_records_csv.empty()) {
      std::ostringstream csv;
      volcp::write_records_csv(csv, summary.records);
      volcp::write_text_file(mc_records_csv, csv.str());
    }
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const volcp::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const volcp::numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
