#include "volcp/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "volcp/errors.hpp"

namespace volcp {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim_ws(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_cell(const std::string& cell, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim_ws(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

SamplePath load_csv(std::istream& in, const CsvSpec& spec) {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t columns = 0;
  bool saw_data = false;

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    line = trim_ws(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_row(line);

    if (!saw_data) {
      // A first line that does not parse as numbers is a header.
      bool numeric = true;
      double probe;
      for (const auto& cell : cells)
        if (!parse_cell(cell, probe)) numeric = false;
      if (!numeric) {
        if (cells.size() != 1 && cells.size() != 2) {
          std::ostringstream msg;
          msg << "csv row " << row << ": expected 1 or 2 columns, got "
              << cells.size();
          throw input_error(msg.str());
        }
        columns = cells.size();
        continue;
      }
      columns = cells.size();
      if (columns != 1 && columns != 2) {
        std::ostringstream msg;
        msg << "csv row " << row << ": expected 1 or 2 columns, got " << columns;
        throw input_error(msg.str());
      }
      saw_data = true;
    }

    if (cells.size() != columns) {
      std::ostringstream msg;
      msg << "csv row " << row << ": ragged row, expected " << columns
          << " cells, got " << cells.size();
      throw input_error(msg.str());
    }
    saw_data = true;
    std::vector<double> parsed(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_cell(cells[c], parsed[c])) {
        std::ostringstream msg;
        msg << "csv row " << row << ": non-numeric cell '" << cells[c] << "'";
        throw input_error(msg.str());
      }
    }
    if (columns == 2) {
      times.push_back(parsed[0]);
      values.push_back(parsed[1]);
    } else {
      values.push_back(parsed[0]);
    }

    if (columns == 2 && times.size() >= 3) {
      const double dt0 = times[1] - times[0];
      const std::size_t i = times.size() - 1;
      const double dt = times[i] - times[i - 1];
      if (std::fabs(dt - dt0) > 1e-6 * std::fabs(dt0)) {
        std::ostringstream msg;
        msg << "csv row " << row << ": non-equispaced times (step " << dt
            << " vs " << dt0 << ")";
        throw input_error(msg.str());
      }
    }
  }

  if (values.size() < 3)
    throw input_error("csv: need at least 3 observations");

  SamplePath path;
  if (columns == 2) {
    if (spec.delta_override)
      throw input_error(
          "csv: file has a time column; do not also supply a step size");
    const double dt0 = times[1] - times[0];
    if (!(dt0 > 0.0)) throw input_error("csv: time steps must be positive");
    path.delta = dt0;
  } else {
    if (!spec.delta_override)
      throw input_error("csv: value-only file needs an explicit step size");
    if (!(*spec.delta_override > 0.0))
      throw input_error("csv: step size must be positive");
    path.delta = *spec.delta_override;
  }
  path.values = std::move(values);
  return path;
}

SamplePath load_csv_file(const std::string& filename, const CsvSpec& spec) {
  std::ifstream in(filename);
  if (!in) throw input_error("cannot open '" + filename + "'");
  return load_csv(in, spec);
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << "t,x\n";
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    out << format_double(static_cast<double>(i) * path.delta) << ','
        << format_double(path.values[i]) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const CusumTrace& trace) {
  out << "k,S_k,D_k,V_k,U2_k\n";
  for (std::size_t k = 1; k < trace.n; ++k) {
    out << k << ',' << format_double(trace.s_at(k)) << ','
        << format_double(trace.d_at(k)) << ',' << format_double(trace.v_at(k))
        << ',' << format_double(trace.u2_at(k)) << '\n';
  }
}

namespace {

template <typename T>
void put_optional(ojson& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

template <typename T>
std::optional<T> get_optional(const ojson& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<McRecord>& records) {
  out << "replication,failed,k_hat,tau_hat,theta1_hat,theta2_hat,"
         "vartheta_hat,z_bar,stat_d,stat_v,reject,ci_tau_lower,ci_tau_upper,"
         "ci_tau_hit,ci_theta1_lower,ci_theta1_upper,ci_theta1_hit,"
         "ci_theta2_lower,ci_theta2_upper,ci_theta2_hit,sqrtn_dv_at_k0\n";
  auto opt_num = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  auto opt_bool = [](const std::optional<bool>& v) {
    return v ? std::string(*v ? "1" : "0") : std::string();
  };
  for (const McRecord& r : records) {
    out << r.replication << ',' << (r.failed ? 1 : 0) << ',' << r.k_hat << ','
        << format_double(r.tau_hat) << ',' << format_double(r.theta1_hat)
        << ',' << format_double(r.theta2_hat) << ','
        << format_double(r.vartheta_hat) << ',' << format_double(r.z_bar)
        << ',' << opt_num(r.stat_d) << ',' << opt_num(r.stat_v) << ','
        << opt_bool(r.reject) << ',' << opt_num(r.ci_tau_lower) << ','
        << opt_num(r.ci_tau_upper) << ',' << opt_bool(r.ci_tau_hit) << ','
        << opt_num(r.ci_theta1_lower) << ',' << opt_num(r.ci_theta1_upper)
        << ',' << opt_bool(r.ci_theta1_hit) << ','
        << opt_num(r.ci_theta2_lower) << ',' << opt_num(r.ci_theta2_upper)
        << ',' << opt_bool(r.ci_theta2_hit) << ','
        << opt_num(r.sqrtn_dv_at_k0) << '\n';
  }
}

ojson to_json(const ChangePointFit& fit) {
  ojson j;
  j["n"] = fit.n;
  j["k_hat"] = fit.k_hat;
  j["tau_hat"] = fit.tau_hat;
  j["theta1_hat"] = fit.theta1_hat;
  j["theta2_hat"] = fit.theta2_hat;
  j["vartheta_hat"] = fit.vartheta_hat;
  j["trim_delta"] = fit.trim_delta;
  j["residual_mode"] = fit.residual_mode == ResidualMode::KnownCoefficients
                           ? "known"
                           : "estimated";
  j["z_bar"] = fit.z_bar;
  return j;
}

ChangePointFit fit_from_json(const ojson& j) {
  ChangePointFit fit;
  fit.n = j.at("n").get<std::size_t>();
  fit.k_hat = j.at("k_hat").get<std::size_t>();
  fit.tau_hat = j.at("tau_hat").get<double>();
  fit.theta1_hat = j.at("theta1_hat").get<double>();
  fit.theta2_hat = j.at("theta2_hat").get<double>();
  fit.vartheta_hat = j.at("vartheta_hat").get<double>();
  fit.trim_delta = j.at("trim_delta").get<double>();
  fit.residual_mode = j.at("residual_mode").get<std::string>() == "known"
                          ? ResidualMode::KnownCoefficients
                          : ResidualMode::EstimatedDrift;
  fit.z_bar = j.at("z_bar").get<double>();
  return fit;
}

ojson to_json(const McConfig& mc) {
  ojson j;
  j["paths"] = mc.paths;
  j["grid"] = mc.grid;
  j["horizon"] = mc.horizon;
  j["step"] = mc.step;
  j["seed"] = mc.seed;
  return j;
}

McConfig mc_config_from_json(const ojson& j) {
  McConfig mc;
  mc.paths = j.at("paths").get<std::size_t>();
  mc.grid = j.at("grid").get<std::size_t>();
  mc.horizon = j.at("horizon").get<double>();
  mc.step = j.at("step").get<double>();
  mc.seed = j.at("seed").get<std::uint64_t>();
  return mc;
}

ojson to_json(const TestReport& report) {
  ojson j;
  j["stat_d"] = report.stat_d;
  j["stat_v"] = report.stat_v;
  j["statistic_used"] = report.statistic_used == TestStatistic::D ? "d" : "v";
  j["trim_delta"] = report.trim_delta;
  j["alpha"] = report.alpha;
  j["critical_value"] = report.critical_value;
  j["reject"] = report.reject;
  j["cv_provenance"] = ojson{{"target", limit_law_name(report.cv_target)},
                             {"mc", to_json(report.cv_mc)}};
  return j;
}

TestReport test_report_from_json(const ojson& j) {
  TestReport report;
  report.stat_d = j.at("stat_d").get<double>();
  report.stat_v = j.at("stat_v").get<double>();
  report.statistic_used = j.at("statistic_used").get<std::string>() == "d"
                              ? TestStatistic::D
                              : TestStatistic::V;
  report.trim_delta = j.at("trim_delta").get<double>();
  report.alpha = j.at("alpha").get<double>();
  report.critical_value = j.at("critical_value").get<double>();
  report.reject = j.at("reject").get<bool>();
  const auto& prov = j.at("cv_provenance");
  report.cv_target = limit_law_from_name(prov.at("target").get<std::string>());
  report.cv_mc = mc_config_from_json(prov.at("mc"));
  return report;
}

namespace {

std::string interval_target_name(IntervalTarget target) {
  switch (target) {
    case IntervalTarget::Tau0: return "tau0";
    case IntervalTarget::Theta1: return "theta1";
    case IntervalTarget::Theta2: return "theta2";
  }
  return "?";
}

IntervalTarget interval_target_from_name(const std::string& name) {
  if (name == "tau0") return IntervalTarget::Tau0;
  if (name == "theta1") return IntervalTarget::Theta1;
  if (name == "theta2") return IntervalTarget::Theta2;
  throw input_error("unknown interval target '" + name + "'");
}

}  // namespace

ojson to_json(const IntervalEstimate& interval) {
  ojson j;
  j["target"] = interval_target_name(interval.target);
  j["lower"] = interval.lower;
  j["upper"] = interval.upper;
  j["coverage"] = interval.coverage;
  j["method"] = interval.method;
  return j;
}

IntervalEstimate interval_from_json(const ojson& j) {
  IntervalEstimate interval;
  interval.target = interval_target_from_name(j.at("target").get<std::string>());
  interval.lower = j.at("lower").get<double>();
  interval.upper = j.at("upper").get<double>();
  interval.coverage = j.at("coverage").get<double>();
  interval.method = j.at("method").get<std::string>();
  return interval;
}

ojson to_json(const QuantileTable& table) {
  ojson j;
  j["target"] = limit_law_name(table.target);
  j["trim_delta"] = table.trim_delta;
  j["mc"] = to_json(table.mc);
  j["boundary_hit_fraction"] = table.boundary_hit_fraction;
  j["probabilities"] = table.probabilities;
  j["quantiles"] = table.quantiles;
  return j;
}

QuantileTable table_from_json(const ojson& j) {
  QuantileTable table;
  table.target = limit_law_from_name(j.at("target").get<std::string>());
  table.trim_delta = j.at("trim_delta").get<double>();
  table.mc = mc_config_from_json(j.at("mc"));
  table.boundary_hit_fraction = j.at("boundary_hit_fraction").get<double>();
  table.probabilities = j.at("probabilities").get<std::vector<double>>();
  table.quantiles = j.at("quantiles").get<std::vector<double>>();
  if (table.probabilities.size() != table.quantiles.size())
    throw input_error("quantile table: probabilities/quantiles length mismatch");
  return table;
}

ojson to_json(const ExperimentConfig& cfg) {
  if (cfg.model.drift_spec.empty() || cfg.model.diffusion_spec.empty())
    throw input_error(
        "experiment: model coefficients need textual specs to serialize");
  ojson model;
  model["b"] = cfg.model.drift_spec;
  model["sigma"] = cfg.model.diffusion_spec;
  model["theta1"] = cfg.model.theta1;
  model["theta2"] = cfg.model.theta2;
  model["tau0"] = cfg.model.tau0;
  model["x0"] = cfg.model.x0;
  model["n"] = cfg.model.n;
  model["t_horizon"] = cfg.model.t_horizon;

  ojson j;
  j["model"] = model;
  j["replications"] = cfg.replications;
  j["seed"] = cfg.seed;
  j["trim_delta"] = cfg.trim_delta;
  j["drift_mode"] =
      cfg.drift_mode == ResidualMode::KnownCoefficients ? "known" : "estimated";
  j["kernel"] = cfg.kernel.name();
  if (cfg.bandwidth_override) j["bandwidth"] = *cfg.bandwidth_override;
  j["outputs"] = ojson{{"statistics", cfg.want_statistics},
                       {"test", cfg.want_test},
                       {"tau_ci", cfg.want_tau_ci},
                       {"theta_ci", cfg.want_theta_ci},
                       {"dv_at_k0", cfg.want_dv_at_k0}};
  j["alpha"] = cfg.alpha;
  j["tau_coverage"] = cfg.tau_coverage;
  j["theta_coverage"] = cfg.theta_coverage;
  j["theta_tilde"] = theta_tilde_mode_name(cfg.theta_tilde_mode);
  j["failure_budget"] = cfg.failure_budget;
  return j;
}

ExperimentConfig experiment_from_json(const ojson& j) {
  ExperimentConfig cfg;
  const auto& model = j.at("model");
  cfg.model.drift_spec = model.at("b").get<std::string>();
  cfg.model.diffusion_spec = model.at("sigma").get<std::string>();
  cfg.model.drift = make_coefficient(cfg.model.drift_spec);
  cfg.model.diffusion = make_coefficient(cfg.model.diffusion_spec);
  cfg.model.theta1 = model.at("theta1").get<double>();
  cfg.model.theta2 = model.at("theta2").get<double>();
  cfg.model.tau0 = model.at("tau0").get<double>();
  cfg.model.x0 = model.at("x0").get<double>();
  cfg.model.n = model.at("n").get<std::size_t>();
  cfg.model.t_horizon = model.at("t_horizon").get<double>();

  cfg.replications = j.at("replications").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.trim_delta = j.at("trim_delta").get<double>();
  cfg.drift_mode = j.at("drift_mode").get<std::string>() == "known"
                       ? ResidualMode::KnownCoefficients
                       : ResidualMode::EstimatedDrift;
  cfg.kernel = kernel_from_name(j.at("kernel").get<std::string>());
  cfg.bandwidth_override = get_optional<double>(j, "bandwidth");
  const auto& outputs = j.at("outputs");
  cfg.want_statistics = outputs.at("statistics").get<bool>();
  cfg.want_test = outputs.at("test").get<bool>();
  cfg.want_tau_ci = outputs.at("tau_ci").get<bool>();
  cfg.want_theta_ci = outputs.at("theta_ci").get<bool>();
  cfg.want_dv_at_k0 = outputs.at("dv_at_k0").get<bool>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.tau_coverage = j.at("tau_coverage").get<double>();
  cfg.theta_coverage = j.at("theta_coverage").get<double>();
  cfg.theta_tilde_mode =
      theta_tilde_mode_from_name(j.at("theta_tilde").get<std::string>());
  cfg.failure_budget = j.at("failure_budget").get<std::size_t>();
  return cfg;
}

namespace {

ojson record_to_json(const McRecord& r) {
  ojson j;
  j["replication"] = r.replication;
  if (r.failed) {
    j["failed"] = true;
    j["error"] = r.error;
    return j;
  }
  j["k_hat"] = r.k_hat;
  j["tau_hat"] = r.tau_hat;
  j["theta1_hat"] = r.theta1_hat;
  j["theta2_hat"] = r.theta2_hat;
  j["vartheta_hat"] = r.vartheta_hat;
  j["z_bar"] = r.z_bar;
  put_optional(j, "stat_d", r.stat_d);
  put_optional(j, "stat_v", r.stat_v);
  put_optional(j, "reject", r.reject);
  put_optional(j, "ci_tau_lower", r.ci_tau_lower);
  put_optional(j, "ci_tau_upper", r.ci_tau_upper);
  put_optional(j, "ci_tau_hit", r.ci_tau_hit);
  put_optional(j, "ci_theta1_lower", r.ci_theta1_lower);
  put_optional(j, "ci_theta1_upper", r.ci_theta1_upper);
  put_optional(j, "ci_theta1_hit", r.ci_theta1_hit);
  put_optional(j, "ci_theta2_lower", r.ci_theta2_lower);
  put_optional(j, "ci_theta2_upper", r.ci_theta2_upper);
  put_optional(j, "ci_theta2_hit", r.ci_theta2_hit);
  put_optional(j, "sqrtn_dv_at_k0", r.sqrtn_dv_at_k0);
  return j;
}

McRecord record_from_json(const ojson& j) {
  McRecord r;
  r.replication = j.at("replication").get<std::size_t>();
  if (j.contains("failed") && j.at("failed").get<bool>()) {
    r.failed = true;
    r.error = j.at("error").get<std::string>();
    return r;
  }
  r.k_hat = j.at("k_hat").get<std::size_t>();
  r.tau_hat = j.at("tau_hat").get<double>();
  r.theta1_hat = j.at("theta1_hat").get<double>();
  r.theta2_hat = j.at("theta2_hat").get<double>();
  r.vartheta_hat = j.at("vartheta_hat").get<double>();
  r.z_bar = j.at("z_bar").get<double>();
  r.stat_d = get_optional<double>(j, "stat_d");
  r.stat_v = get_optional<double>(j, "stat_v");
  r.reject = get_optional<bool>(j, "reject");
  r.ci_tau_lower = get_optional<double>(j, "ci_tau_lower");
  r.ci_tau_upper = get_optional<double>(j, "ci_tau_upper");
  r.ci_tau_hit = get_optional<bool>(j, "ci_tau_hit");
  r.ci_theta1_lower = get_optional<double>(j, "ci_theta1_lower");
  r.ci_theta1_upper = get_optional<double>(j, "ci_theta1_upper");
  r.ci_theta1_hit = get_optional<bool>(j, "ci_theta1_hit");
  r.ci_theta2_lower = get_optional<double>(j, "ci_theta2_lower");
  r.ci_theta2_upper = get_optional<double>(j, "ci_theta2_upper");
  r.ci_theta2_hit = get_optional<bool>(j, "ci_theta2_hit");
  r.sqrtn_dv_at_k0 = get_optional<double>(j, "sqrtn_dv_at_k0");
  return r;
}

ojson aggregates_to_json(const McAggregates& a) {
  ojson j;
  j["completed"] = a.completed;
  j["failed"] = a.failed;
  j["median_abs_tau_error"] = a.median_abs_tau_error;
  j["mean_theta1_hat"] = a.mean_theta1_hat;
  j["mean_theta2_hat"] = a.mean_theta2_hat;
  put_optional(j, "var_sqrtn_theta1_error", a.var_sqrtn_theta1_error);
  put_optional(j, "var_sqrtn_theta2_error", a.var_sqrtn_theta2_error);
  put_optional(j, "rejection_rate", a.rejection_rate);
  put_optional(j, "tau_ci_coverage", a.tau_ci_coverage);
  put_optional(j, "theta1_ci_coverage", a.theta1_ci_coverage);
  put_optional(j, "theta2_ci_coverage", a.theta2_ci_coverage);
  return j;
}

bool aggregates_close(const McAggregates& a, const McAggregates& b) {
  auto near = [](double x, double y) {
    return std::fabs(x - y) <= 1e-12 * std::max({1.0, std::fabs(x), std::fabs(y)});
  };
  auto near_opt = [&](const std::optional<double>& x,
                      const std::optional<double>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || near(*x, *y);
  };
  return a.completed == b.completed && a.failed == b.failed &&
         near(a.median_abs_tau_error, b.median_abs_tau_error) &&
         near(a.mean_theta1_hat, b.mean_theta1_hat) &&
         near(a.mean_theta2_hat, b.mean_theta2_hat) &&
         near_opt(a.var_sqrtn_theta1_error, b.var_sqrtn_theta1_error) &&
         near_opt(a.var_sqrtn_theta2_error, b.var_sqrtn_theta2_error) &&
         near_opt(a.rejection_rate, b.rejection_rate) &&
         near_opt(a.tau_ci_coverage, b.tau_ci_coverage) &&
         near_opt(a.theta1_ci_coverage, b.theta1_ci_coverage) &&
         near_opt(a.theta2_ci_coverage, b.theta2_ci_coverage);
}

}  // namespace

ojson to_json(const McSummary& summary) {
  ojson j;
  j["config"] = to_json(summary.config);
  j["aggregates"] = aggregates_to_json(summary.aggregates);
  ojson records = ojson::array();
  for (const McRecord& r : summary.records) records.push_back(record_to_json(r));
  j["records"] = std::move(records);
  return j;
}

McSummary summary_from_json(const ojson& j) {
  McSummary summary;
  summary.config = experiment_from_json(j.at("config"));
  for (const auto& rec : j.at("records"))
    summary.records.push_back(record_from_json(rec));
  summary.aggregates = aggregate_records(summary.config, summary.records);

  // Self-consistency: stored aggregates must match a recomputation.
  McAggregates stored;
  const auto& a = j.at("aggregates");
  stored.completed = a.at("completed").get<std::size_t>();
  stored.failed = a.at("failed").get<std::size_t>();
  stored.median_abs_tau_error = a.at("median_abs_tau_error").get<double>();
  stored.mean_theta1_hat = a.at("mean_theta1_hat").get<double>();
  stored.mean_theta2_hat = a.at("mean_theta2_hat").get<double>();
  stored.var_sqrtn_theta1_error = get_optional<double>(a, "var_sqrtn_theta1_error");
  stored.var_sqrtn_theta2_error = get_optional<double>(a, "var_sqrtn_theta2_error");
  stored.rejection_rate = get_optional<double>(a, "rejection_rate");
  stored.tau_ci_coverage = get_optional<double>(a, "tau_ci_coverage");
  stored.theta1_ci_coverage = get_optional<double>(a, "theta1_ci_coverage");
  stored.theta2_ci_coverage = get_optional<double>(a, "theta2_ci_coverage");
  if (!aggregates_close(stored, summary.aggregates))
    throw input_error(
        "mc summary: stored aggregates disagree with the records");
  return summary;
}

ojson to_json(const RateReport& report) {
  ojson j;
  ojson points = ojson::array();
  for (const RatePoint& pt : report.points)
    points.push_back(ojson{{"n", pt.n}, {"median_error", pt.median_error}});
  j["points"] = std::move(points);
  j["slope"] = report.slope;
  j["intercept"] = report.intercept;
  j["residuals"] = report.residuals;
  return j;
}

ojson to_json(const DiagnosticReport& report) {
  auto side = [](const BoundaryTrace& trace) {
    return ojson{{"diverges", trace.diverges},
                 {"stabilized", trace.stabilized},
                 {"grid", trace.grid},
                 {"partial_sums", trace.partial_sums}};
  };
  ojson j;
  j["left_integral_diverges"] = report.left_integral_diverges;
  j["right_integral_diverges"] = report.right_integral_diverges;
  j["left"] = side(report.left);
  j["right"] = side(report.right);
  return j;
}

ojson make_report(const std::string& kind, ojson payload,
                  std::optional<ojson> config_echo) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  if (config_echo) j["config"] = *config_echo;
  for (auto& [key, value] : payload.items()) j[key] = std::move(value);
  return j;
}

ojson open_report(const std::string& text, const std::string& expected_kind) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw input_error(std::string("bad report JSON: ") + e.what());
  }
  if (!j.contains("schema_version") ||
      j.at("schema_version").get<int>() != kSchemaVersion)
    throw input_error("report: missing or unsupported schema_version");
  if (!j.contains("kind") || j.at("kind").get<std::string>() != expected_kind)
    throw input_error("report: expected kind '" + expected_kind + "'");
  return j;
}

void save_table(const std::string& filename, const QuantileTable& table) {
  write_text_file(filename, make_report("quantile_table", to_json(table)).dump(2) + "\n");
}

QuantileTable load_table(const std::string& filename) {
  return table_from_json(open_report(read_text_file(filename), "quantile_table"));
}

std::string table_cache_key(LimitLaw target, double trim_delta,
                            const McConfig& mc) {
  char buf[160];
  if (target == LimitLaw::ArgmaxDriftBM) {
    std::snprintf(buf, sizeof(buf), "%s_V%g_h%g_M%zu_seed%llu.json",
                  limit_law_name(target).c_str(), mc.horizon, mc.step,
                  mc.paths, static_cast<unsigned long long>(mc.seed));
  } else {
    std::snprintf(buf, sizeof(buf), "%s_d%g_M%zu_m%zu_seed%llu.json",
                  limit_law_name(target).c_str(), trim_delta, mc.paths,
                  mc.grid, static_cast<unsigned long long>(mc.seed));
  }
  return buf;
}

QuantileTable cached_table(const std::string& cache_dir, LimitLaw target,
                           double trim_delta, const McConfig& mc) {
  namespace fs = std::filesystem;
  const fs::path file = fs::path(cache_dir) / table_cache_key(target, trim_delta, mc);
  if (fs::exists(file)) return load_table(file.string());

  QuantileTable table;
  switch (target) {
    case LimitLaw::BridgeSup:
      table = simulate_bridge_sup(trim_delta, false, mc);
      break;
    case LimitLaw::WeightedBridgeSup:
      table = simulate_bridge_sup(trim_delta, true, mc);
      break;
    case LimitLaw::ArgmaxDriftBM:
      table = simulate_argmax_law(mc);
      break;
  }
  fs::create_directories(cache_dir);
  save_table(file.string(), table);
  return table;
}

std::string read_text_file(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  if (!in) throw input_error("cannot open '" + filename + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& filename, const std::string& text) {
  std::ofstream out(filename, std::ios::binary);
  if (!out) throw input_error("cannot open '" + filename + "' for writing");
  out << text;
  if (!out) throw input_error("failed writing '" + filename + "'");
}

}  // namespace volcp
